from typing import Optional

import numpy as np

from ..models import Perturbation, PerturbationTarget
from ..utils.errors import NonFiniteError, ShapeError


def make_delta(grad: np.ndarray, epsilon: float,
               target: PerturbationTarget = PerturbationTarget.WORD,
               mask: Optional[np.ndarray] = None) -> Perturbation:
    """delta = epsilon * g / ||g|| per sentence, ||.|| the Frobenius norm of the len x d block.

    A sentence whose gradient block is zero gets a zero delta. Positions where
    `mask` (rows x len) is False are zeroed before normalising.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.ndim != 3:
        raise ShapeError("make_delta", grad.shape)
    if not np.isfinite(epsilon) or epsilon < 0:
        raise ValueError(f"epsilon must be finite and >= 0, got {epsilon}")
    bad = np.argwhere(~np.isfinite(grad))
    if len(bad):
        raise NonFiniteError(f"{len(bad)} non-finite gradient entries", coordinate=tuple(int(i) for i in bad[0]))

    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != grad.shape[:2]:
            raise ShapeError("make_delta", grad.shape, mask.shape)
        grad = grad * mask[:, :, None]

    norms = np.sqrt(np.sum(grad.reshape(grad.shape[0], -1) ** 2, axis=1))
    safe = np.where(norms > 0, norms, 1.0)
    delta = np.where((norms > 0)[:, None, None], epsilon * grad / safe[:, None, None], 0.0)
    return Perturbation(delta=delta, epsilon=float(epsilon), target=target)
