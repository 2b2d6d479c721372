from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .vocabulary import Vocabulary

# content token ids only, no language tag and no eos
Sentence = List[int]

LANGUAGES = ("lang1", "lang2")


def other_language(language: str) -> str:
    return "lang2" if language == "lang1" else "lang1"


@dataclass
class Batch:
    ids: np.ndarray      # rows x max-in-batch, pad beyond each length
    lengths: np.ndarray  # valid length per row, tag and eos included
    language: str
    truncated: int = 0

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.lengths = np.asarray(self.lengths, dtype=np.int64)
        if self.ids.ndim != 2 or self.lengths.shape != (self.ids.shape[0],):
            raise ValueError(f"batch ids {self.ids.shape} and lengths {self.lengths.shape} disagree")
        if self.language not in LANGUAGES:
            raise ValueError(f"unknown language {self.language!r}")

    @classmethod
    def from_sentences(cls, sentences: Sequence[Sequence[int]], vocab: Optional[Vocabulary], language: str,
                       max_len: Optional[int] = None) -> "Batch":
        # only the fixed special ids are read, so `vocab` may be None
        vocab = vocab if vocab is not None else Vocabulary
        tag = vocab.lang_id(language)
        rows, truncated = [], 0
        for sentence in sentences:
            content = list(sentence)
            if max_len is not None and len(content) > max_len - 2:
                content = content[:max_len - 2]
                truncated += 1
            rows.append([tag] + content + [vocab.eos_id])
        width = max((len(r) for r in rows), default=0)
        ids = np.full((len(rows), width), vocab.pad_id, dtype=np.int64)
        for i, row in enumerate(rows):
            ids[i, :len(row)] = row
        lengths = np.array([len(r) for r in rows], dtype=np.int64)
        return cls(ids=ids, lengths=lengths, language=language, truncated=truncated)

    @property
    def n_rows(self) -> int:
        return self.ids.shape[0]

    @property
    def width(self) -> int:
        return self.ids.shape[1]

    @property
    def mask(self) -> np.ndarray:
        return np.arange(self.width)[None, :] < self.lengths[:, None]

    def content(self, row: int) -> Sentence:
        return self.ids[row, 1:self.lengths[row] - 1].tolist()

    def sentences(self) -> List[Sentence]:
        return [self.content(i) for i in range(self.n_rows)]

    def select(self, rows: Sequence[int]) -> "Batch":
        rows = list(rows)
        lengths = self.lengths[rows]
        width = int(lengths.max()) if len(rows) else 0
        return Batch(ids=self.ids[rows, :width], lengths=lengths, language=self.language)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'language': self.language,
            'rows': self.n_rows,
            'width': self.width,
            'lengths': self.lengths.tolist(),
            'truncated': self.truncated,
        }
