from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np


class ATMode(str, Enum):
    NONE = "none"
    WORD_AT = "word_at"
    POSITION_AT = "position_at"
    BOTH_AT = "both_at"

    @property
    def perturbs_words(self) -> bool:
        return self in (ATMode.WORD_AT, ATMode.BOTH_AT)

    @property
    def perturbs_positions(self) -> bool:
        return self in (ATMode.POSITION_AT, ATMode.BOTH_AT)


class PerturbationTarget(str, Enum):
    WORD = "word"
    POSITION = "position"


@dataclass
class Perturbation:
    delta: np.ndarray  # rows x len x d_model
    epsilon: float
    target: PerturbationTarget

    @property
    def shape(self):
        return self.delta.shape

    def sentence_norms(self) -> np.ndarray:
        flat = self.delta.reshape(self.delta.shape[0], -1)
        return np.sqrt(np.sum(flat * flat, axis=1))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'target': self.target.value,
            'epsilon': self.epsilon,
            'shape': list(self.delta.shape),
            'sentence_norms': self.sentence_norms().tolist(),
        }
