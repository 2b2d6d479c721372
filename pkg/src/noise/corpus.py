from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..models import NoiseSpec
from ..utils.errors import CorpusFormatError
from ..utils.logger import get_logger
from .generators import apply_test_noise

logger = get_logger("noise.corpus")


@dataclass
class NoiseSummary:
    lines: int
    tokens: int
    replaced: int
    total_displacement: int
    max_displacement: int
    a: float
    b: float

    @property
    def replacement_rate(self) -> float:
        return self.replaced / self.tokens if self.tokens else 0.0

    @property
    def mean_displacement(self) -> float:
        return self.total_displacement / self.tokens if self.tokens else 0.0

    def to_text(self) -> str:
        return (f"lines={self.lines} tokens={self.tokens} a={self.a:g} b={self.b:g} "
                f"replaced={self.replaced} replacement_rate={self.replacement_rate:.6f} "
                f"mean_displacement={self.mean_displacement:.6f} max_displacement={self.max_displacement}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lines': self.lines,
            'tokens': self.tokens,
            'replaced': self.replaced,
            'replacement_rate': self.replacement_rate,
            'mean_displacement': self.mean_displacement,
            'max_displacement': self.max_displacement,
            'a': self.a,
            'b': self.b,
        }


def read_corpus(path: Union[str, Path]) -> List[List[str]]:
    """One whitespace-tokenized sentence per line; blank lines are malformed."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CorpusFormatError(str(path), None, f"unreadable ({exc.strerror or exc})") from exc

    sentences = []
    for line_number, line in enumerate(raw.splitlines(), start=1):
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError:
            raise CorpusFormatError(str(path), line_number, "not valid UTF-8") from None
        tokens = text.split()
        if not tokens:
            raise CorpusFormatError(str(path), line_number, "empty sentence")
        sentences.append(tokens)
    return sentences


def line_rng(seed: int, line_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, line_index])


def noisify_corpus(corpus_path: Union[str, Path], spec: NoiseSpec, output_path: Union[str, Path],
                   candidates: Optional[Sequence[str]] = None) -> NoiseSummary:
    """Write a line-aligned noised copy of a corpus under evaluation noise (a, b).

    Replacement tokens come from `candidates`, or from the corpus' own token
    types when none are given. Line i draws from a stream seeded by (spec.seed, i).
    """
    sentences = read_corpus(corpus_path)
    if candidates is None:
        candidates = sorted({token for sentence in sentences for token in sentence})

    summary = NoiseSummary(lines=0, tokens=0, replaced=0, total_displacement=0, max_displacement=0,
                           a=spec.a, b=spec.b)
    out_lines = []
    for index, tokens in enumerate(sentences):
        noised, events, permutation = apply_test_noise(tokens, spec.a, spec.b, line_rng(spec.seed, index),
                                                       candidates)
        out_lines.append(" ".join(noised) + "\n")
        summary.lines += 1
        summary.tokens += len(tokens)
        summary.replaced += int(events.sum())
        summary.total_displacement += int(permutation.displacement.sum())
        summary.max_displacement = max(summary.max_displacement, permutation.max_displacement())

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text("".join(out_lines), encoding="utf-8")
    logger.info(f"Noised {corpus_path} -> {output_path}: {summary.to_text()}")
    return summary
