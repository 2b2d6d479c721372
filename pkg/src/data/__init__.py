from .toy_language import (ToyLanguageSpec, ToyLanguagePair, CorpusBundle, generate_bundle, load_bundle,
                           reorder, REORDER_RULES)
from .corpus import BatchStream, EncodedCorpus, batch_stream, build_vocab, encode_corpus

__all__ = ['ToyLanguageSpec', 'ToyLanguagePair', 'CorpusBundle', 'generate_bundle', 'load_bundle',
           'reorder', 'REORDER_RULES', 'BatchStream', 'EncodedCorpus', 'batch_stream', 'build_vocab',
           'encode_corpus']
