from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..models import Batch, Perturbation, Sentence, Vocabulary
from ..tensor import (DiffArray, add, cross_entropy, embedding, add_bias, matmul, no_grad,
                      transpose)
from ..utils.config import ModelConfig
from ..utils.errors import ConfigError, GraphError, ShapeError
from . import layers

Delta = Union[Perturbation, np.ndarray, None]


@dataclass
class EmbeddingInjection:
    """Zero-valued leaves added at the embedding sum; backward fills their grads."""
    word: DiffArray
    position: DiffArray


@dataclass
class EncoderStates:
    states: DiffArray        # rows x src_len x d_model
    key_mask: np.ndarray     # rows x src_len, True at real tokens
    source: Batch
    injection: Optional[EmbeddingInjection] = None

    @property
    def n_rows(self) -> int:
        return self.states.shape[0]


class TransformerModel:
    """One encoder, one decoder and one embedding table shared by both languages.

    The language tag at the start of every row selects the direction.
    """

    def __init__(self, config: ModelConfig, seed: int = 0, dtype: str = "float64"):
        if config.vocab_size <= Vocabulary.n_special:
            raise ConfigError(f"vocab_size={config.vocab_size} leaves no room for content tokens")
        self.config = config
        self.dtype = np.dtype(dtype)
        self._params = self._init_parameters(np.random.default_rng(seed))

    def _init_parameters(self, rng: np.random.Generator) -> layers.Params:
        c, dt = self.config, self.dtype
        params: layers.Params = {}
        # rows of unit expected norm
        params["word_embedding"] = DiffArray(
            rng.normal(0.0, c.d_model ** -0.5, (c.vocab_size, c.d_model)).astype(dt), requires_grad=True)
        params["position_embedding"] = DiffArray(
            rng.normal(0.0, c.d_model ** -0.5, (c.max_len, c.d_model)).astype(dt), requires_grad=True)

        for i in range(c.n_layers):
            prefix = f"encoder.{i}"
            layers.init_norm(params, f"{prefix}.attn_norm", c.d_model, dt)
            layers.init_attention(params, f"{prefix}.self_attn", c.d_model, rng, dt)
            layers.init_norm(params, f"{prefix}.ffn_norm", c.d_model, dt)
            layers.init_feed_forward(params, f"{prefix}.ffn", c.d_model, c.d_ff, rng, dt)
        layers.init_norm(params, "encoder.final_norm", c.d_model, dt)

        for i in range(c.n_layers):
            prefix = f"decoder.{i}"
            layers.init_norm(params, f"{prefix}.self_norm", c.d_model, dt)
            layers.init_attention(params, f"{prefix}.self_attn", c.d_model, rng, dt)
            layers.init_norm(params, f"{prefix}.cross_norm", c.d_model, dt)
            layers.init_attention(params, f"{prefix}.cross_attn", c.d_model, rng, dt)
            layers.init_norm(params, f"{prefix}.ffn_norm", c.d_model, dt)
            layers.init_feed_forward(params, f"{prefix}.ffn", c.d_model, c.d_ff, rng, dt)
        layers.init_norm(params, "decoder.final_norm", c.d_model, dt)

        # output projection is tied to word_embedding
        params["output_bias"] = DiffArray(np.zeros(c.vocab_size, dtype=dt), requires_grad=True)
        return params

    # parameters

    def parameters(self) -> layers.Params:
        return dict(self._params)

    def parameter_count(self) -> int:
        return int(sum(p.values.size for p in self._params.values()))

    def zero_grad(self):
        for param in self._params.values():
            param.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.values.copy() for name, p in self._params.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        missing = set(self._params) - set(state)
        unexpected = set(state) - set(self._params)
        if missing or unexpected:
            raise ShapeError("load_state_dict", (f"missing={sorted(missing)}",), (f"unexpected={sorted(unexpected)}",))
        for name, param in self._params.items():
            values = np.asarray(state[name])
            if values.shape != param.shape:
                raise ShapeError(f"load_state_dict[{name}]", param.shape, values.shape)
            param.values = values.astype(self.dtype, copy=True)
            param.grad = None

    # embedding stage

    def _check_batch(self, batch: Batch, op: str):
        if batch.n_rows == 0 or batch.width == 0:
            raise ShapeError(op, batch.ids.shape)
        if batch.width > self.config.max_len:
            raise ShapeError(op, batch.ids.shape, (f"max_len={self.config.max_len}",))

    def _as_constant(self, delta: Delta, shape: Tuple[int, ...], op: str) -> Optional[DiffArray]:
        if delta is None:
            return None
        values = delta.delta if isinstance(delta, Perturbation) else np.asarray(delta)
        if values.shape != shape:
            raise ShapeError(op, shape, values.shape)
        return DiffArray(values.astype(self.dtype))

    def _embed(self, ids: np.ndarray, word_delta: Delta = None, position_delta: Delta = None,
               track: bool = False) -> Tuple[DiffArray, Optional[EmbeddingInjection]]:
        rows, width = ids.shape
        shape = (rows, width, self.config.d_model)
        word = embedding(self._params["word_embedding"], ids)
        position = embedding(self._params["position_embedding"], np.broadcast_to(np.arange(width), ids.shape))

        injection = None
        if track:
            injection = EmbeddingInjection(
                word=DiffArray(np.zeros(shape, dtype=self.dtype), requires_grad=True),
                position=DiffArray(np.zeros(shape, dtype=self.dtype), requires_grad=True))
            word = add(word, injection.word)
            position = add(position, injection.position)

        word_const = self._as_constant(word_delta, shape, "encode.word_delta")
        if word_const is not None:
            word = add(word, word_const)
        position_const = self._as_constant(position_delta, shape, "encode.position_delta")
        if position_const is not None:
            position = add(position, position_const)

        return add(word, position), injection

    # encoder / decoder

    def encode(self, batch: Batch, word_delta: Delta = None, position_delta: Delta = None,
               track_embeddings: bool = False, rng: Optional[np.random.Generator] = None) -> EncoderStates:
        self._check_batch(batch, "encode")
        c, p = self.config, self._params
        x, injection = self._embed(batch.ids, word_delta, position_delta, track_embeddings)
        key_mask = batch.mask
        attn_mask = key_mask[:, None, None, :]

        for i in range(c.n_layers):
            prefix = f"encoder.{i}"
            h = layers.norm(x, p, f"{prefix}.attn_norm")
            x = layers.residual(x, layers.attention(h, h, p, f"{prefix}.self_attn", c.n_heads, attn_mask),
                                c.dropout, rng)
            h = layers.norm(x, p, f"{prefix}.ffn_norm")
            x = layers.residual(x, layers.feed_forward(h, p, f"{prefix}.ffn", c.dropout, rng), c.dropout, rng)

        states = layers.norm(x, p, "encoder.final_norm")
        return EncoderStates(states=states, key_mask=key_mask, source=batch, injection=injection)

    def _decoder_logits(self, encoded: EncoderStates, ids: np.ndarray, mask: np.ndarray,
                        rng: Optional[np.random.Generator] = None) -> DiffArray:
        c, p = self.config, self._params
        if ids.shape[0] != encoded.n_rows:
            raise ShapeError("decode", encoded.states.shape, ids.shape)
        width = ids.shape[1]
        if width > c.max_len:
            raise ShapeError("decode", ids.shape, (f"max_len={c.max_len}",))
        x, _ = self._embed(ids)
        causal = np.tril(np.ones((width, width), dtype=bool))
        self_mask = causal[None, None, :, :] & mask[:, None, None, :]
        cross_mask = encoded.key_mask[:, None, None, :]

        for i in range(c.n_layers):
            prefix = f"decoder.{i}"
            h = layers.norm(x, p, f"{prefix}.self_norm")
            x = layers.residual(x, layers.attention(h, h, p, f"{prefix}.self_attn", c.n_heads, self_mask),
                                c.dropout, rng)
            h = layers.norm(x, p, f"{prefix}.cross_norm")
            x = layers.residual(x, layers.attention(h, encoded.states, p, f"{prefix}.cross_attn", c.n_heads,
                                                    cross_mask), c.dropout, rng)
            h = layers.norm(x, p, f"{prefix}.ffn_norm")
            x = layers.residual(x, layers.feed_forward(h, p, f"{prefix}.ffn", c.dropout, rng), c.dropout, rng)

        h = layers.norm(x, p, "decoder.final_norm")
        return add_bias(matmul(h, transpose(p["word_embedding"], (1, 0))), p["output_bias"])

    def decode_loss(self, encoded: EncoderStates, target: Batch,
                    rng: Optional[np.random.Generator] = None) -> DiffArray:
        """Token-mean NLL of `target` under teacher forcing; pads excluded."""
        if target.n_rows == 0 or target.width < 2 or int((target.lengths >= 2).sum()) == 0:
            raise ValueError("decode_loss needs a non-empty target batch")
        tag = Vocabulary.lang1_id if target.language == "lang1" else Vocabulary.lang2_id
        if not np.all(target.ids[:, 0] == tag):
            raise ValueError(f"target rows must start with the {target.language} tag")
        mask = target.mask
        logits = self._decoder_logits(encoded, target.ids[:, :-1], mask[:, :-1], rng)
        return cross_entropy(logits, target.ids[:, 1:], mask[:, 1:])

    def greedy_decode(self, encoded: EncoderStates, target_language: str, max_len: int) -> List[Sentence]:
        """Greedy generation per row; returned sentences hold content ids only."""
        if max_len < 0 or max_len > self.config.max_len:
            raise ValueError(f"max_len={max_len} exceeds the model's {self.config.max_len} decoder positions")
        rows = encoded.n_rows
        tag = Vocabulary.lang1_id if target_language == "lang1" else Vocabulary.lang2_id
        banned = [i for i in range(Vocabulary.n_special) if i != Vocabulary.eos_id]

        ids = np.full((rows, 1), tag, dtype=np.int64)
        finished = np.zeros(rows, dtype=bool)
        outputs: List[Sentence] = [[] for _ in range(rows)]
        with no_grad():
            for step in range(max_len + 1):
                if step == max_len:
                    next_ids = np.full(rows, Vocabulary.eos_id, dtype=np.int64)
                else:
                    logits = self._decoder_logits(encoded, ids, np.ones(ids.shape, dtype=bool)).values[:, -1, :]
                    logits = logits.copy()
                    logits[:, banned] = -np.inf
                    next_ids = np.argmax(logits, axis=-1)
                for row in np.flatnonzero(~finished):
                    if next_ids[row] == Vocabulary.eos_id:
                        finished[row] = True
                    else:
                        outputs[row].append(int(next_ids[row]))
                if finished.all():
                    break
                ids = np.concatenate([ids, next_ids[:, None]], axis=1)
        return outputs

    def embedding_gradients(self, encoded: EncoderStates) -> Tuple[np.ndarray, np.ndarray]:
        """d loss / d (word delta) and d loss / d (position delta) at the embedding sum."""
        if encoded.n_rows == 0:
            raise ShapeError("embedding_gradients", encoded.states.shape)
        if encoded.injection is None:
            raise GraphError("encode was not asked to track embedding gradients")
        word, position = encoded.injection.word, encoded.injection.position
        if word.grad is None or position.grad is None:
            raise GraphError("embedding_gradients called before backward")
        return word.grad.copy(), position.grad.copy()
