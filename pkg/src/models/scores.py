from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd


@dataclass
class BleuScore:
    score: float
    precisions: List[float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    matches: List[int] = field(default_factory=list)
    totals: List[int] = field(default_factory=list)

    def to_text(self) -> str:
        precisions = "/".join(f"{100 * p:.1f}" for p in self.precisions)
        return (f"bleu={self.score:.2f} precisions={precisions} bp={self.brevity_penalty:.4f} "
                f"hyp_len={self.hyp_len} ref_len={self.ref_len}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'score': self.score,
            'precisions': self.precisions,
            'brevity_penalty': self.brevity_penalty,
            'hyp_len': self.hyp_len,
            'ref_len': self.ref_len,
        }


SWEEP_COLUMNS = (
    "translation_l1_l2", "translation_l2_l1",
    "autoencoder_l1", "autoencoder_l2",
    "similarity_l1_l2", "similarity_l2_l1",
)

SWEEP_HEADER = (
    "# noise sweep; one row per noise level. columns: axis value; translation BLEU "
    "lang1->lang2 and lang2->lang1 against references; auto-encoder BLEU of same-language "
    "reconstruction of the noised input against the clean sentence; similarity BLEU of "
    "noisy-input translations against clean-input translations"
)


@dataclass
class SweepResult:
    axis: str                        # "a" (word noise) or "b" (word-order noise)
    values: List[float]
    cells: Dict[str, List[float]]    # column name -> one entry per value
    label: str = "model"

    def __post_init__(self):
        if self.axis not in ("a", "b"):
            raise ValueError(f"sweep axis must be 'a' or 'b', got {self.axis!r}")
        if any(later <= earlier for earlier, later in zip(self.values, self.values[1:])):
            raise ValueError(f"sweep axis values must be strictly increasing: {self.values}")
        for name in SWEEP_COLUMNS:
            column = self.cells.get(name)
            if column is None or len(column) != len(self.values):
                raise ValueError(f"sweep column {name!r} does not match the axis")
            if not np.all(np.isfinite(column)):
                raise ValueError(f"sweep column {name!r} has non-finite cells")

    def column(self, name: str) -> List[float]:
        return list(self.cells[name])

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame({self.axis: self.values})
        for name in SWEEP_COLUMNS:
            frame[name] = self.cells[name]
        return frame

    def to_csv(self, path: Union[str, Path]):
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="") as handle:
            handle.write(SWEEP_HEADER + "\n")
            self.to_dataframe().to_csv(handle, index=False, float_format="%.4f")

    @classmethod
    def from_csv(cls, path: Union[str, Path], label: str = "model") -> "SweepResult":
        frame = pd.read_csv(path, comment="#")
        axis = frame.columns[0]
        return cls(axis=axis, values=frame[axis].astype(float).tolist(),
                   cells={name: frame[name].astype(float).tolist() for name in SWEEP_COLUMNS},
                   label=label)

    def to_text(self) -> str:
        lines = []
        for i, value in enumerate(self.values):
            row = " ".join(f"{name}={self.cells[name][i]:.2f}" for name in SWEEP_COLUMNS)
            lines.append(f"{self.label} {self.axis}={value:g} {row}")
        return "\n".join(lines)
