from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

AVERAGE_DECAY = 0.99
AVERAGED = ("denoising", "adversarial", "backtranslation", "total")


@dataclass
class TrainState:
    step: int = 0
    adam_t: int = 0
    adam_m: Dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: Dict[str, np.ndarray] = field(default_factory=dict)
    rng_states: Dict[str, Optional[dict]] = field(default_factory=dict)
    consumed: Dict[str, int] = field(default_factory=lambda: {"lang1": 0, "lang2": 0})
    averages: Dict[str, float] = field(default_factory=dict)
    skipped_steps: int = 0

    def update_averages(self, values: Dict[str, float], decay: float = AVERAGE_DECAY):
        for key in AVERAGED:
            if key not in values:
                continue
            previous = self.averages.get(key)
            value = float(values[key])
            self.averages[key] = value if previous is None else decay * previous + (1 - decay) * value

    def to_header(self) -> Dict[str, Any]:
        return {
            'step': self.step,
            'adam_t': self.adam_t,
            'rng_states': self.rng_states,
            'consumed': dict(self.consumed),
            'averages': dict(self.averages),
            'skipped_steps': self.skipped_steps,
        }

    def to_arrays(self) -> Dict[str, Dict[str, np.ndarray]]:
        return {"adam_m": self.adam_m, "adam_v": self.adam_v}

    @classmethod
    def from_checkpoint(cls, header: Dict[str, Any], arrays: Dict[str, Dict[str, np.ndarray]]) -> "TrainState":
        return cls(
            step=int(header["step"]),
            adam_t=int(header["adam_t"]),
            adam_m=dict(arrays.get("adam_m", {})),
            adam_v=dict(arrays.get("adam_v", {})),
            rng_states=dict(header.get("rng_states", {})),
            consumed={k: int(v) for k, v in header.get("consumed", {}).items()},
            averages={k: float(v) for k, v in header.get("averages", {}).items()},
            skipped_steps=int(header.get("skipped_steps", 0)),
        )
