from .transformer import TransformerModel, EncoderStates, EmbeddingInjection
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .translator import Translator

__all__ = ['TransformerModel', 'EncoderStates', 'EmbeddingInjection', 'Checkpoint',
           'save_checkpoint', 'load_checkpoint', 'Translator']
