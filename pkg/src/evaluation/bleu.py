import math
from collections import Counter
from typing import Hashable, List, Sequence, Tuple

from ..models import BleuScore

MAX_ORDER = 4


def ngram_counts(tokens: Sequence[Hashable], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_statistics(hypotheses: Sequence[Sequence[Hashable]], references: Sequence[Sequence[Hashable]],
                      max_order: int = MAX_ORDER) -> Tuple[List[int], List[int], int, int]:
    """Clipped n-gram matches and hypothesis n-gram totals per order, plus lengths."""
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            hyp_counts = ngram_counts(hyp, n)
            ref_counts = ngram_counts(ref, n)
            matches[n - 1] += sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)
    return matches, totals, hyp_len, ref_len


def bleu(hypotheses: Sequence[Sequence[Hashable]], references: Sequence[Sequence[Hashable]],
         max_order: int = MAX_ORDER) -> BleuScore:
    """Corpus-level case-sensitive BLEU, single reference, no smoothing.

    score = 100 * BP * exp(mean log p_n), 0 when any p_n is 0;
    BP = exp(1 - r/h) when h < r, else 1. An order with no hypothesis n-grams
    at all (every hypothesis shorter than n) is left out of the mean.
    """
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses but {len(references)} references")
    if not hypotheses:
        raise ValueError("BLEU needs at least one sentence pair")

    matches, totals, hyp_len, ref_len = corpus_statistics(hypotheses, references, max_order)
    precisions = [m / t if t > 0 else 0.0 for m, t in zip(matches, totals)]

    if hyp_len == 0 and ref_len == 0:
        # empty against empty everywhere is a perfect match
        return BleuScore(score=100.0, precisions=[1.0] * max_order, brevity_penalty=1.0,
                         hyp_len=0, ref_len=0, matches=matches, totals=totals)
    if hyp_len == 0:
        brevity_penalty = 0.0
    elif hyp_len < ref_len:
        brevity_penalty = math.exp(1.0 - ref_len / hyp_len)
    else:
        brevity_penalty = 1.0

    effective = [p for p, t in zip(precisions, totals) if t > 0]
    if effective and min(effective) > 0:
        score = 100.0 * brevity_penalty * math.exp(sum(math.log(p) for p in effective) / len(effective))
    else:
        score = 0.0

    return BleuScore(score=score, precisions=precisions, brevity_penalty=brevity_penalty,
                     hyp_len=hyp_len, ref_len=ref_len, matches=matches, totals=totals)
