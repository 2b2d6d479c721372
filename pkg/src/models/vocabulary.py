from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import VocabularyError

PAD, BOS, EOS, UNK, LANG1, LANG2 = "<pad>", "<bos>", "<eos>", "<unk>", "<lang1>", "<lang2>"
SPECIAL_TOKENS = (PAD, BOS, EOS, UNK, LANG1, LANG2)


class Vocabulary:
    """Shared token <-> id map for both languages. Specials hold the lowest ids."""

    def __init__(self, tokens: Sequence[str] = ()):
        self._id_to_token: List[str] = list(SPECIAL_TOKENS)
        self._token_to_id: Dict[str, int] = {tok: i for i, tok in enumerate(SPECIAL_TOKENS)}
        for token in tokens:
            if token in self._token_to_id:
                raise VocabularyError(f"duplicate or reserved token {token!r}")
            if not token or any(ch.isspace() for ch in token):
                raise VocabularyError(f"token {token!r} is empty or contains whitespace")
            self._token_to_id[token] = len(self._id_to_token)
            self._id_to_token.append(token)

    pad_id = SPECIAL_TOKENS.index(PAD)
    bos_id = SPECIAL_TOKENS.index(BOS)
    eos_id = SPECIAL_TOKENS.index(EOS)
    unk_id = SPECIAL_TOKENS.index(UNK)
    lang1_id = SPECIAL_TOKENS.index(LANG1)
    lang2_id = SPECIAL_TOKENS.index(LANG2)
    n_special = len(SPECIAL_TOKENS)

    @classmethod
    def from_counts(cls, counts: Counter) -> "Vocabulary":
        # frequency-descending, ties broken by surface form for a stable id order
        ordered = sorted((tok for tok in counts if tok not in SPECIAL_TOKENS),
                         key=lambda tok: (-counts[tok], tok))
        return cls(ordered)

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._id_to_token == other._id_to_token

    @property
    def tokens(self) -> List[str]:
        return list(self._id_to_token[self.n_special:])

    def token_id(self, token: str) -> int:
        return self._token_to_id.get(token, self.unk_id)

    def token(self, token_id: int) -> str:
        return self._id_to_token[token_id]

    @classmethod
    def lang_id(cls, language: str) -> int:
        if language == "lang1":
            return cls.lang1_id
        if language == "lang2":
            return cls.lang2_id
        raise VocabularyError(f"unknown language {language!r}")

    def is_special(self, token_id: int) -> bool:
        return token_id < self.n_special

    def content_ids(self) -> np.ndarray:
        return np.arange(self.n_special, len(self), dtype=np.int64)

    def encode(self, tokens: Iterable[str]) -> Tuple[List[int], int]:
        """Map tokens to ids; returns (ids, number of unknown tokens)."""
        ids, unknown = [], 0
        for token in tokens:
            token_id = self._token_to_id.get(token)
            if token_id is None or token_id < self.n_special:
                token_id = self.unk_id
                unknown += 1
            ids.append(token_id)
        return ids, unknown

    def decode(self, ids: Iterable[int], strip_specials: bool = True) -> List[str]:
        out = []
        for token_id in ids:
            token_id = int(token_id)
            if strip_specials and self.is_special(token_id) and token_id != self.unk_id:
                continue
            out.append(self._id_to_token[token_id])
        return out

    def save(self, path: Union[str, Path]):
        Path(path).write_text("".join(f"{tok}\n" for tok in self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Vocabulary":
        path = Path(path)
        if not path.is_file():
            raise VocabularyError(f"vocabulary file not found: {path}")
        tokens = [line.rstrip("\n") for line in path.read_text(encoding="utf-8").splitlines()]
        return cls([tok for tok in tokens if tok])

    def to_dict(self) -> Dict[str, object]:
        return {
            'size': len(self),
            'specials': list(SPECIAL_TOKENS),
            'tokens': self.tokens,
        }


def counts_from_lines(lines: Iterable[str], counts: Optional[Counter] = None) -> Counter:
    counts = counts if counts is not None else Counter()
    for line in lines:
        counts.update(line.split())
    return counts
