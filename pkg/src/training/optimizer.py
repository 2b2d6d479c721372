from typing import Dict, Tuple

import numpy as np

from ..tensor import DiffArray


class Adam:
    """Adam with bias correction over a name -> parameter mapping.

    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g^2
    theta -= lr * m_hat / (sqrt(v_hat) + eps)
    """

    def __init__(self, params: Dict[str, DiffArray], lr: float = 5e-4, beta1: float = 0.9,
                 beta2: float = 0.98, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise ValueError(f"betas must lie in [0, 1), got {beta1}, {beta2}")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.values) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.values) for name, p in params.items()}

    def step(self):
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            p.values = (p.values - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.dtype)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def snapshot(self) -> Tuple[int, Dict[str, np.ndarray], Dict[str, np.ndarray]]:
        return self.t, {k: v.copy() for k, v in self.m.items()}, {k: v.copy() for k, v in self.v.items()}

    def restore(self, t: int, m: Dict[str, np.ndarray], v: Dict[str, np.ndarray]):
        for name, p in self.params.items():
            if m[name].shape != p.shape or v[name].shape != p.shape:
                raise ValueError(f"optimizer moments for {name} do not match the parameter shape {p.shape}")
        self.t = t
        self.m = {k: np.array(m[k], dtype=self.params[k].dtype) for k in self.params}
        self.v = {k: np.array(v[k], dtype=self.params[k].dtype) for k in self.params}


def global_grad_norm(params: Dict[str, DiffArray]) -> float:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad.astype(np.float64) ** 2))
    return float(np.sqrt(total))


def clip_grad_norm(params: Dict[str, DiffArray], max_norm: float) -> float:
    """Scale gradients in place so their global L2 norm is at most max_norm; returns the norm before clipping."""
    norm = global_grad_norm(params)
    if np.isfinite(norm) and norm > max_norm > 0:
        factor = max_norm / (norm + 1e-12)
        for p in params.values():
            if p.grad is not None:
                p.grad *= factor
    return norm
