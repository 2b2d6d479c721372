from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data.toy_language import CorpusBundle
from ..models import BleuScore, NoiseSpec, Sentence, Vocabulary
from ..noise.corpus import line_rng
from ..noise.generators import apply_test_noise
from ..translation.translator import Translator
from ..utils.logger import get_logger
from .bleu import bleu

logger = get_logger("evaluation.evaluator")

DIRECTIONS = {"l1_l2": ("lang1", "lang2"), "l2_l1": ("lang2", "lang1")}


@dataclass
class EvaluationSet:
    """Line-aligned parallel test sentences as id lists."""
    lang1: List[Sentence]
    lang2: List[Sentence]

    def __post_init__(self):
        if len(self.lang1) != len(self.lang2):
            raise ValueError(f"test sides differ in length: {len(self.lang1)} vs {len(self.lang2)}")

    def __len__(self) -> int:
        return len(self.lang1)

    def side(self, language: str) -> List[Sentence]:
        return self.lang1 if language == "lang1" else self.lang2

    @classmethod
    def from_bundle(cls, bundle: CorpusBundle, vocab: Vocabulary, limit: Optional[int] = None) -> "EvaluationSet":
        l1, l2 = bundle.test_pairs()
        if limit is not None:
            l1, l2 = l1[:limit], l2[:limit]
        return cls(lang1=[vocab.encode(s)[0] for s in l1], lang2=[vocab.encode(s)[0] for s in l2])


def noised_sources(sentences: Sequence[Sentence], spec: Optional[NoiseSpec],
                   candidates: Sequence[int]) -> List[Sentence]:
    """Evaluation noise (a, b) per sentence; line i always draws from (spec.seed, i)."""
    if spec is None or (spec.a == 0 and spec.b == 0):
        return [list(s) for s in sentences]
    return [apply_test_noise(s, spec.a, spec.b, line_rng(spec.seed, i), candidates)[0]
            for i, s in enumerate(sentences)]


def _direction(direction: str) -> Tuple[str, str]:
    try:
        return DIRECTIONS[direction]
    except KeyError:
        raise ValueError(f"direction must be one of {sorted(DIRECTIONS)}, got {direction!r}") from None


def evaluate_translation(translator: Translator, test_set: EvaluationSet, direction: str,
                         spec: Optional[NoiseSpec] = None) -> BleuScore:
    """Greedy-translate every (optionally noised) source and score against the references."""
    source, target = _direction(direction)
    inputs = noised_sources(test_set.side(source), spec, translator.vocab.content_ids())
    hypotheses = translator.translate_ids(inputs, source, target)
    return bleu(hypotheses, test_set.side(target))


def evaluate_autoencoder(translator: Translator, sentences: Sequence[Sentence], language: str,
                         spec: Optional[NoiseSpec] = None) -> BleuScore:
    """Same-language reconstruction of the noised input against the clean sentence."""
    inputs = noised_sources(sentences, spec, translator.vocab.content_ids())
    return bleu(translator.translate_ids(inputs, language, language), sentences)


def similarity(translator: Translator, sources: Sequence[Sentence], language: str,
               spec: Optional[NoiseSpec] = None) -> BleuScore:
    """BLEU of noisy-input translations (hypotheses) against clean-input translations (references)."""
    target = "lang2" if language == "lang1" else "lang1"
    clean = translator.translate_ids([list(s) for s in sources], language, target)
    noisy = translator.translate_ids(noised_sources(sources, spec, translator.vocab.content_ids()),
                                     language, target)
    return bleu(noisy, clean)


def score_noise_level(translator: Translator, test_set: EvaluationSet, spec: NoiseSpec,
                      cached_clean: Optional[Dict[str, List[Sentence]]] = None) -> Dict[str, float]:
    """All sweep columns at one noise level, translating each noised input once."""
    candidates = translator.vocab.content_ids()
    cells: Dict[str, float] = {}
    for direction, (source, target) in DIRECTIONS.items():
        sources = test_set.side(source)
        noisy_inputs = noised_sources(sources, spec, candidates)
        noisy = translator.translate_ids(noisy_inputs, source, target)
        if cached_clean is not None and direction in cached_clean:
            clean = cached_clean[direction]
        else:
            clean = translator.translate_ids([list(s) for s in sources], source, target)
        cells[f"translation_{direction}"] = bleu(noisy, test_set.side(target)).score
        cells[f"similarity_{direction}"] = bleu(noisy, clean).score
        tag = "l1" if source == "lang1" else "l2"
        cells[f"autoencoder_{tag}"] = bleu(translator.translate_ids(noisy_inputs, source, source), sources).score
    return cells


def clean_translations(translator: Translator, test_set: EvaluationSet) -> Dict[str, List[Sentence]]:
    return {direction: translator.translate_ids(test_set.side(source), source, target)
            for direction, (source, target) in DIRECTIONS.items()}


def least_squares_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs, ys = np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or len(xs) < 2 or np.ptp(xs) == 0:
        raise ValueError("slope needs at least two distinct x values with matching y values")
    return float(np.polyfit(xs, ys, 1)[0])
