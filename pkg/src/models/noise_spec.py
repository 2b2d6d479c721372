from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class NoiseSpec(BaseModel):
    """Evaluation noise (a, b) and the training corruption C(.) parameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a: float = Field(0.0, ge=0.0, le=1.0)
    b: float = Field(0.0, ge=0.0)
    drop_prob: float = Field(0.1, ge=0.0, lt=1.0)
    swap_window: float = Field(3.0, ge=0.0)
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()


@dataclass
class OrderPermutation:
    gamma: np.ndarray  # target position of each source index
    q: np.ndarray      # the sorted scores Q_i = i + U(0, b)

    @property
    def displacement(self) -> np.ndarray:
        return np.abs(self.gamma - np.arange(len(self.gamma)))

    def max_displacement(self) -> int:
        return int(self.displacement.max()) if len(self.gamma) else 0

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.gamma, np.arange(len(self.gamma))))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'gamma': self.gamma.tolist(),
            'q': self.q.tolist(),
        }
