from typing import Callable, Optional

import numpy as np

from ..utils.errors import NonFiniteError
from ..utils.logger import get_logger
from .autodiff import ComputeGraph, DiffArray, no_grad

logger = get_logger("tensor.grad_check")


def grad_check(f: Callable[[DiffArray], DiffArray], point: DiffArray, h: float = 1e-5,
               max_coords: Optional[int] = None, seed: int = 0, floor: float = 1e-3) -> float:
    """Max relative error between the analytic gradient of `f` at `point` and
    central finite differences (f(x+h) - f(x-h)) / 2h.

    `point` is perturbed in place and restored, so `f` may ignore its argument
    and read a model parameter that is `point`. Relative error is measured
    against max(|analytic|, |numeric|, floor).
    """
    if not np.isfinite(h) or h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")

    point.values = np.ascontiguousarray(point.values)
    saved_grad, saved_flag = point.grad, point.requires_grad
    point.grad, point.requires_grad = None, True
    try:
        graph = ComputeGraph()
        with graph:
            loss = f(point)
        if not np.isfinite(loss.values).all():
            raise NonFiniteError("loss is not finite at the base point")
        graph.backward(loss, inputs=[point])
        analytic = (point.grad if point.grad is not None else np.zeros_like(point.values)).reshape(-1)
    finally:
        point.grad, point.requires_grad = saved_grad, saved_flag

    flat = point.values.reshape(-1)
    if max_coords is None or max_coords >= flat.size:
        coords = np.arange(flat.size)
    else:
        coords = np.sort(np.random.default_rng(seed).choice(flat.size, size=max_coords, replace=False))

    worst = 0.0
    with no_grad():
        for c in coords:
            original = flat[c]
            try:
                flat[c] = original + h
                f_plus = float(f(point).values)
                flat[c] = original - h
                f_minus = float(f(point).values)
            finally:
                flat[c] = original
            coordinate = tuple(int(i) for i in np.unravel_index(c, point.shape))
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise NonFiniteError("non-finite loss during finite differences", coordinate=coordinate)
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = float(analytic[c])
            error = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            worst = max(worst, error)

    logger.debug(f"grad_check over {len(coords)} coordinates: max relative error {worst:.3e}")
    return worst
