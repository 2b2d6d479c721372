"""Differentiable primitives.

Exactly the set the transformer needs. Broadcasting is limited to the
row-wise bias add; every other binary primitive wants equal shapes.
"""

from typing import Optional, Sequence

import numpy as np

from ..utils.errors import GraphError, ShapeError
from .autodiff import DiffArray, record

MASKED_SCORE = -1e9


def add(a: DiffArray, b: DiffArray) -> DiffArray:
    if a.shape != b.shape:
        raise ShapeError("add", a.shape, b.shape)
    return record("add", a.values + b.values, (a, b), lambda g: (g, g))


def add_bias(x: DiffArray, bias: DiffArray) -> DiffArray:
    if bias.ndim != 1 or x.ndim < 1 or x.shape[-1] != bias.shape[0]:
        raise ShapeError("add_bias", x.shape, bias.shape)

    def backward(g):
        return g, g.reshape(-1, g.shape[-1]).sum(axis=0)

    return record("add_bias", x.values + bias.values, (x, bias), backward)


def mul(a: DiffArray, b: DiffArray) -> DiffArray:
    if a.shape != b.shape:
        raise ShapeError("mul", a.shape, b.shape)
    av, bv = a.values, b.values
    return record("mul", av * bv, (a, b), lambda g: (g * bv, g * av))


def scale(x: DiffArray, factor: float) -> DiffArray:
    factor = x.values.dtype.type(factor)
    return record("scale", x.values * factor, (x,), lambda g: (g * factor,))


def mask_multiply(x: DiffArray, mask: np.ndarray, kind: str = "mask_multiply") -> DiffArray:
    """Multiply by a constant array of the same shape (dropout keep-masks, pad masks)."""
    mask = np.asarray(mask, dtype=x.dtype)
    if mask.shape != x.shape:
        raise ShapeError(kind, x.shape, mask.shape)
    return record(kind, x.values * mask, (x,), lambda g: (g * mask,))


def dropout(x: DiffArray, rate: float, rng: Optional[np.random.Generator]) -> DiffArray:
    if rng is None or rate <= 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return mask_multiply(x, keep, kind="dropout")


def sum_all(x: DiffArray) -> DiffArray:
    shape = x.shape
    return record("sum", np.sum(x.values), (x,), lambda g: (np.full(shape, g, dtype=x.dtype),))


def relu(x: DiffArray) -> DiffArray:
    positive = x.values > 0
    return record("relu", np.where(positive, x.values, 0).astype(x.dtype), (x,),
                  lambda g: (g * positive,))


def matmul(x: DiffArray, w: DiffArray) -> DiffArray:
    """(..., n) @ (n, m) -> (..., m)."""
    if w.ndim != 2 or x.ndim < 1 or x.shape[-1] != w.shape[0]:
        raise ShapeError("matmul", x.shape, w.shape)
    xv, wv = x.values, w.values

    def backward(g):
        gx = g @ wv.T
        gw = xv.reshape(-1, xv.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        return gx, gw

    return record("matmul", xv @ wv, (x, w), backward)


def batched_matmul(a: DiffArray, b: DiffArray) -> DiffArray:
    """(..., t, k) @ (..., k, s) -> (..., t, s) with identical leading dims."""
    if a.ndim < 3 or a.ndim != b.ndim or a.shape[:-2] != b.shape[:-2] or a.shape[-1] != b.shape[-2]:
        raise ShapeError("batched_matmul", a.shape, b.shape)
    av, bv = a.values, b.values

    def backward(g):
        return np.matmul(g, np.swapaxes(bv, -1, -2)), np.matmul(np.swapaxes(av, -1, -2), g)

    return record("batched_matmul", np.matmul(av, bv), (a, b), backward)


def transpose(x: DiffArray, axes: Sequence[int]) -> DiffArray:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError("transpose", x.shape, axes)
    inverse = tuple(np.argsort(axes))
    return record("transpose", np.transpose(x.values, axes), (x,),
                  lambda g: (np.transpose(g, inverse),))


def reshape(x: DiffArray, shape: Sequence[int]) -> DiffArray:
    shape = tuple(shape)
    original = x.shape
    try:
        values = x.values.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", original, shape) from None
    return record("reshape", values, (x,), lambda g: (g.reshape(original),))


def softmax(x: DiffArray, mask: Optional[np.ndarray] = None) -> DiffArray:
    """Softmax over the last axis; False entries of `mask` get zero probability."""
    scores = x.values
    keep = None
    if mask is not None:
        try:
            keep = np.broadcast_to(np.asarray(mask, dtype=bool), scores.shape)
        except ValueError:
            raise ShapeError("softmax", x.shape, np.shape(mask)) from None
        scores = np.where(keep, scores, MASKED_SCORE)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    probs = (exp / exp.sum(axis=-1, keepdims=True)).astype(x.dtype)

    def backward(g):
        grad = probs * (g - np.sum(g * probs, axis=-1, keepdims=True))
        if keep is not None:
            grad = np.where(keep, grad, 0).astype(x.dtype)
        return (grad,)

    return record("softmax", probs, (x,), backward)


def layer_norm(x: DiffArray, gamma: DiffArray, beta: DiffArray, eps: float = 1e-5) -> DiffArray:
    d = x.shape[-1] if x.ndim else 0
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeError("layer_norm", x.shape, gamma.shape, beta.shape)
    xv = x.values
    mean = xv.mean(axis=-1, keepdims=True)
    centered = xv - mean
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    normalized = centered * inv_std
    out = normalized * gamma.values + beta.values

    def backward(g):
        g_norm = g * gamma.values
        gx = inv_std * (g_norm - g_norm.mean(axis=-1, keepdims=True)
                        - normalized * (g_norm * normalized).mean(axis=-1, keepdims=True))
        flat_g = g.reshape(-1, d)
        g_gamma = (flat_g * normalized.reshape(-1, d)).sum(axis=0)
        g_beta = flat_g.sum(axis=0)
        return gx, g_gamma, g_beta

    return record("layer_norm", out, (x, gamma, beta), backward)


def embedding(table: DiffArray, ids: np.ndarray) -> DiffArray:
    """Gather rows of `table` (V x d) at integer `ids` -> ids.shape + (d,)."""
    ids = np.asarray(ids)
    if table.ndim != 2 or not np.issubdtype(ids.dtype, np.integer):
        raise ShapeError("embedding", table.shape, ids.shape)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError("embedding", table.shape, (f"ids in [{ids.min()}, {ids.max()}]",))
    n_rows, d = table.shape

    def backward(g):
        grad = np.zeros((n_rows, d), dtype=table.dtype)
        np.add.at(grad, ids.reshape(-1), g.reshape(-1, d))
        return (grad,)

    return record("embedding", table.values[ids], (table,), backward)


def cross_entropy(logits: DiffArray, targets: np.ndarray, mask: Optional[np.ndarray] = None) -> DiffArray:
    """Mean negative log-likelihood of `targets` over the positions where `mask` is True."""
    targets = np.asarray(targets)
    if logits.ndim < 1 or targets.shape != logits.shape[:-1]:
        raise ShapeError("cross_entropy", logits.shape, targets.shape)
    mask = np.ones(targets.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != targets.shape:
        raise ShapeError("cross_entropy", targets.shape, mask.shape)
    count = int(mask.sum())
    if count == 0:
        raise GraphError("cross_entropy over an empty target")
    vocab = logits.shape[-1]
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise ShapeError("cross_entropy", logits.shape, (f"targets in [{targets.min()}, {targets.max()}]",))

    lv = logits.values.reshape(-1, vocab)
    flat_targets = targets.reshape(-1)
    weights = mask.reshape(-1).astype(logits.dtype) / count
    shifted = lv - lv.max(axis=-1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    log_probs = shifted - log_norm
    rows = np.arange(lv.shape[0])
    nll = -log_probs[rows, flat_targets]
    loss = np.asarray(np.sum(nll * weights), dtype=logits.dtype)

    def backward(g):
        grad = np.exp(log_probs)
        grad[rows, flat_targets] -= 1.0
        grad *= (weights * g)[:, None]
        return (grad.reshape(logits.shape),)

    return record("cross_entropy", loss, (logits,), backward)


PRIMITIVES = {
    "add": add,
    "add_bias": add_bias,
    "mul": mul,
    "scale": scale,
    "mask_multiply": mask_multiply,
    "dropout": dropout,
    "sum": sum_all,
    "relu": relu,
    "matmul": matmul,
    "batched_matmul": batched_matmul,
    "transpose": transpose,
    "reshape": reshape,
    "softmax": softmax,
    "layer_norm": layer_norm,
    "embedding": embedding,
    "cross_entropy": cross_entropy,
}


def forward_primitive(kind: str, inputs: Sequence, **options) -> DiffArray:
    """Dispatch by primitive name; non-array operands (ids, masks, axes) go in `inputs` too."""
    try:
        primitive = PRIMITIVES[kind]
    except KeyError:
        raise GraphError(f"unknown primitive {kind!r}") from None
    return primitive(*inputs, **options)
