from typing import List, Optional, Sequence

from ..models import Batch, Sentence, Vocabulary
from ..tensor import no_grad
from ..utils.logger import get_logger
from .transformer import TransformerModel

logger = get_logger("translation.translator")


class Translator:
    """Batched greedy translation with frozen weights."""

    def __init__(self, model: TransformerModel, vocab: Vocabulary, batch_size: int = 64,
                 max_output_len: Optional[int] = None):
        if batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {batch_size}")
        self.model = model
        self.vocab = vocab
        self.batch_size = batch_size
        limit = model.config.max_len - 1
        self.max_output_len = limit if max_output_len is None else min(max_output_len, limit)

    def translate_ids(self, sentences: Sequence[Sentence], source_language: str,
                      target_language: str) -> List[Sentence]:
        outputs: List[Sentence] = []
        with no_grad():
            for start in range(0, len(sentences), self.batch_size):
                chunk = sentences[start:start + self.batch_size]
                batch = Batch.from_sentences(chunk, self.vocab, source_language, self.model.config.max_len)
                encoded = self.model.encode(batch)
                outputs.extend(self.model.greedy_decode(encoded, target_language, self.max_output_len))
        return outputs

    def translate_tokens(self, sentences: Sequence[Sequence[str]], source_language: str,
                         target_language: str) -> List[List[str]]:
        encoded, unknown = [], 0
        for tokens in sentences:
            ids, n_unk = self.vocab.encode(tokens)
            encoded.append(ids)
            unknown += n_unk
        if unknown:
            logger.info(f"{unknown} source tokens were not in the vocabulary and map to <unk>")
        return [self.vocab.decode(ids) for ids in self.translate_ids(encoded, source_language, target_language)]

    def translate_lines(self, lines: Sequence[str], source_language: str, target_language: str) -> List[str]:
        translated = self.translate_tokens([line.split() for line in lines], source_language, target_language)
        return [" ".join(tokens) for tokens in translated]
