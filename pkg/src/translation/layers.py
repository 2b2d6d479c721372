from typing import Dict, Optional

import numpy as np

from ..tensor import (DiffArray, add, add_bias, batched_matmul, dropout, layer_norm, matmul, relu,
                      reshape, scale, softmax, transpose)

Params = Dict[str, DiffArray]


def init_linear(params: Params, prefix: str, fan_in: int, fan_out: int, rng: np.random.Generator,
                dtype) -> None:
    params[f"{prefix}.weight"] = DiffArray(rng.normal(0.0, fan_in ** -0.5, (fan_in, fan_out)).astype(dtype),
                                           requires_grad=True)
    params[f"{prefix}.bias"] = DiffArray(np.zeros(fan_out, dtype=dtype), requires_grad=True)


def init_norm(params: Params, prefix: str, d: int, dtype) -> None:
    params[f"{prefix}.gamma"] = DiffArray(np.ones(d, dtype=dtype), requires_grad=True)
    params[f"{prefix}.beta"] = DiffArray(np.zeros(d, dtype=dtype), requires_grad=True)


def init_attention(params: Params, prefix: str, d: int, rng: np.random.Generator, dtype) -> None:
    for name in ("query", "key", "value", "out"):
        init_linear(params, f"{prefix}.{name}", d, d, rng, dtype)


def init_feed_forward(params: Params, prefix: str, d: int, d_ff: int, rng: np.random.Generator,
                      dtype) -> None:
    init_linear(params, f"{prefix}.inner", d, d_ff, rng, dtype)
    init_linear(params, f"{prefix}.outer", d_ff, d, rng, dtype)


def linear(x: DiffArray, params: Params, prefix: str) -> DiffArray:
    return add_bias(matmul(x, params[f"{prefix}.weight"]), params[f"{prefix}.bias"])


def norm(x: DiffArray, params: Params, prefix: str) -> DiffArray:
    return layer_norm(x, params[f"{prefix}.gamma"], params[f"{prefix}.beta"])


def attention(queries: DiffArray, memory: DiffArray, params: Params, prefix: str, n_heads: int,
              mask: np.ndarray) -> DiffArray:
    """Multi-head scaled dot-product attention; `mask` broadcasts to rows x heads x T x S."""
    rows, t_len, d = queries.shape
    s_len = memory.shape[1]
    head_dim = d // n_heads

    q = transpose(reshape(linear(queries, params, f"{prefix}.query"), (rows, t_len, n_heads, head_dim)),
                  (0, 2, 1, 3))
    k = transpose(reshape(linear(memory, params, f"{prefix}.key"), (rows, s_len, n_heads, head_dim)),
                  (0, 2, 3, 1))
    v = transpose(reshape(linear(memory, params, f"{prefix}.value"), (rows, s_len, n_heads, head_dim)),
                  (0, 2, 1, 3))

    scores = scale(batched_matmul(q, k), head_dim ** -0.5)
    weights = softmax(scores, mask)
    context = transpose(batched_matmul(weights, v), (0, 2, 1, 3))
    return linear(reshape(context, (rows, t_len, d)), params, f"{prefix}.out")


def feed_forward(x: DiffArray, params: Params, prefix: str, rate: float,
                 rng: Optional[np.random.Generator]) -> DiffArray:
    hidden = dropout(relu(linear(x, params, f"{prefix}.inner")), rate, rng)
    return linear(hidden, params, f"{prefix}.outer")


def residual(x: DiffArray, update: DiffArray, rate: float, rng: Optional[np.random.Generator]) -> DiffArray:
    return add(x, dropout(update, rate, rng))
