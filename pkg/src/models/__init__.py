from .vocabulary import Vocabulary, SPECIAL_TOKENS, counts_from_lines
from .batch import Batch, Sentence, LANGUAGES, other_language
from .noise_spec import NoiseSpec, OrderPermutation
from .perturbation import ATMode, Perturbation, PerturbationTarget
from .scores import BleuScore, SweepResult, SWEEP_COLUMNS

__all__ = ['Vocabulary', 'SPECIAL_TOKENS', 'counts_from_lines', 'Batch', 'Sentence', 'LANGUAGES',
           'other_language', 'NoiseSpec', 'OrderPermutation', 'ATMode', 'Perturbation',
           'PerturbationTarget', 'BleuScore', 'SweepResult', 'SWEEP_COLUMNS']
