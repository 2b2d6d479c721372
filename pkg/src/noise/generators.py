"""Synthetic noise on token sequences.

Evaluation noise: word replacement with probability `a`, word-order noise
with magnitude `b`. Training corruption C(.): token dropping followed by a
local shuffle. Every generator draws only from the `rng` it is given.
"""

from typing import List, Sequence, Tuple, TypeVar

import numpy as np

from ..models import Batch, NoiseSpec, OrderPermutation
from ..utils.errors import NoiseSpecError

T = TypeVar("T")


def _check_probability(name: str, value: float):
    if not (0.0 <= value <= 1.0) or not np.isfinite(value):
        raise NoiseSpecError(f"{name} must lie in [0, 1], got {value}")


def word_noise_events(sentence: Sequence[T], a: float, rng: np.random.Generator,
                      candidates: Sequence[T]) -> Tuple[List[T], np.ndarray]:
    """Replace each token with probability `a` by a uniform draw from `candidates`.

    Returns the noised sentence and the boolean replacement-event mask. A draw
    may coincide with the original token.
    """
    _check_probability("a", a)
    n = len(sentence)
    events = rng.random(n) < a
    if events.any() and len(candidates) == 0:
        raise NoiseSpecError("word noise needs at least one candidate token")
    out = list(sentence)
    picks = rng.integers(0, max(len(candidates), 1), size=int(events.sum()))
    for position, pick in zip(np.flatnonzero(events), picks):
        out[position] = candidates[int(pick)]
    return out, events


def word_noise(sentence: Sequence[T], a: float, rng: np.random.Generator,
               candidates: Sequence[T]) -> List[T]:
    return word_noise_events(sentence, a, rng, candidates)[0]


def order_noise(sentence: Sequence[T], b: float, rng: np.random.Generator) -> Tuple[List[T], OrderPermutation]:
    """Sort positions by Q_i = i + U(0, b); ties keep the original order.

    Every token moves at most `b` positions, and b <= 1 leaves the sentence as is.
    """
    if b < 0 or not np.isfinite(b):
        raise NoiseSpecError(f"b must be a finite value >= 0, got {b}")
    n = len(sentence)
    q = np.arange(n, dtype=np.float64) + rng.uniform(0.0, b, n)
    order = np.argsort(q, kind="stable")
    gamma = np.empty(n, dtype=np.int64)
    gamma[order] = np.arange(n)
    return [sentence[k] for k in order], OrderPermutation(gamma=gamma, q=q)


def corrupt(sentence: Sequence[T], spec: NoiseSpec, rng: np.random.Generator) -> List[T]:
    """C(x): drop each token with spec.drop_prob (one always survives), then shuffle locally."""
    n = len(sentence)
    if n == 0:
        raise NoiseSpecError("cannot corrupt an empty sentence")
    keep = rng.random(n) >= spec.drop_prob
    if not keep.any():
        keep[rng.integers(0, n)] = True
    kept = [token for token, k in zip(sentence, keep) if k]
    shuffled, _ = order_noise(kept, spec.swap_window, rng)
    return shuffled


def corrupt_batch(batch: Batch, spec: NoiseSpec, rng: np.random.Generator) -> Batch:
    """Row-wise C(.) on content tokens; language tag and eos stay in place."""
    rows = [corrupt(content, spec, rng) if content else [] for content in batch.sentences()]
    return Batch.from_sentences(rows, None, batch.language)


def apply_test_noise(sentence: Sequence[T], a: float, b: float, rng: np.random.Generator,
                     candidates: Sequence[T]) -> Tuple[List[T], np.ndarray, OrderPermutation]:
    """Word noise then word-order noise; the combined evaluation condition."""
    replaced, events = word_noise_events(sentence, a, rng, candidates)
    reordered, permutation = order_noise(replaced, b, rng)
    return reordered, events, permutation
