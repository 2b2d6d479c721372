from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..adversarial.objectives import denoising_terms
from ..data.corpus import BatchStream, build_vocab
from ..data.toy_language import CorpusBundle
from ..evaluation.evaluator import EvaluationSet, evaluate_translation
from ..models import Batch, Vocabulary
from ..tensor import ComputeGraph, DiffArray, add, no_grad
from ..translation.checkpoint import load_checkpoint, save_checkpoint
from ..translation.transformer import TransformerModel
from ..translation.translator import Translator
from ..utils.config import RunConfig, TrainConfig, dump_flat_config, flatten_run_config
from ..utils.errors import CheckpointFormatError
from ..utils.logger import get_logger
from ..utils.seeding import component_rng, derive_seed
from .metrics_log import MetricsLog, format_row
from .optimizer import Adam, clip_grad_norm
from .state import TrainState

logger = get_logger("training.trainer")

CHECKPOINT_NAME = "checkpoint.npz"
METRICS_NAME = "metrics.log"
CONFIG_NAME = "config.txt"


def _pseudo_sources(model: TransformerModel, batch: Batch, target_language: str) -> Batch:
    """Greedy translations of `batch` with frozen weights; empty outputs become a single unk."""
    max_len = model.config.max_len - 2
    with no_grad():
        generated = model.greedy_decode(model.encode(batch), target_language, max_len)
    empty = sum(1 for sentence in generated if not sentence)
    if empty:
        logger.warning(f"{empty}/{len(generated)} back-translations into {target_language} were empty; "
                       f"replaced by <unk>")
    generated = [sentence if sentence else [Vocabulary.unk_id] for sentence in generated]
    return Batch.from_sentences(generated, None, target_language, model.config.max_len)


def backtranslation_loss(model: TransformerModel, batch_l1: Batch, batch_l2: Batch,
                         dropout_rng: Optional[np.random.Generator] = None) -> DiffArray:
    """-log P(x | y(x)) for lang1 batches plus the mirror term for lang2, y from the current model."""
    total = None
    for batch, other in ((batch_l1, "lang2"), (batch_l2, "lang1")):
        pseudo = _pseudo_sources(model, batch, other)
        loss = model.decode_loss(model.encode(pseudo, rng=dropout_rng), batch, rng=dropout_rng)
        total = loss if total is None else add(total, loss)
    return total


@dataclass
class StepMetrics:
    step: int
    denoising: float
    word_at: float
    position_at: float
    backtranslation: float
    total: float
    grad_norm: float
    skipped: bool = False

    @property
    def adversarial(self) -> float:
        return self.word_at + self.position_at

    def to_dict(self) -> Dict[str, Any]:
        return {
            'step': self.step,
            'denoising': self.denoising,
            'word_at': self.word_at,
            'position_at': self.position_at,
            'adversarial': self.adversarial,
            'backtranslation': self.backtranslation,
            'total': self.total,
            'grad_norm': self.grad_norm,
            'skipped': int(self.skipped),
        }


class Trainer:
    """One optimizer update per step on L_D' + L_B over one batch per language."""

    def __init__(self, model: TransformerModel, config: TrainConfig, stream_l1: BatchStream,
                 stream_l2: BatchStream, state: Optional[TrainState] = None):
        self.model = model
        self.config = config
        self.streams = {"lang1": stream_l1, "lang2": stream_l2}
        self._batches = {language: iter(stream) for language, stream in self.streams.items()}
        self.optimizer = Adam(model.parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2,
                              eps=config.adam_eps)
        self.corruption_rng = component_rng(config.seed, "corruption")
        self.dropout_rng = component_rng(config.seed, "dropout") if model.config.dropout > 0 else None

        self.state = state if state is not None else TrainState()
        if state is not None and state.adam_m:
            self.optimizer.restore(state.adam_t, state.adam_m, state.adam_v)
        self._restore_rngs(self.state.rng_states)

    def _rng_states(self) -> Dict[str, Optional[dict]]:
        return {
            'corruption': self.corruption_rng.bit_generator.state,
            'dropout': self.dropout_rng.bit_generator.state if self.dropout_rng is not None else None,
        }

    def _restore_rngs(self, states: Dict[str, Optional[dict]]):
        if states.get("corruption") is not None:
            self.corruption_rng.bit_generator.state = states["corruption"]
        if states.get("dropout") is not None and self.dropout_rng is not None:
            self.dropout_rng.bit_generator.state = states["dropout"]

    def sync_state(self) -> TrainState:
        self.state.adam_t, self.state.adam_m, self.state.adam_v = self.optimizer.snapshot()
        self.state.rng_states = self._rng_states()
        self.state.consumed = {language: stream.consumed for language, stream in self.streams.items()}
        return self.state

    def _abort(self, reason: str, rng_states: Dict[str, Optional[dict]], values: Dict[str, np.ndarray],
               metrics: StepMetrics) -> StepMetrics:
        for name, param in self.model.parameters().items():
            param.values = values[name]
        self.model.zero_grad()
        self._restore_rngs(rng_states)
        self.state.skipped_steps += 1
        logger.warning(f"step {self.state.step + 1} aborted and rolled back: {reason} "
                       f"({format_row(metrics.to_dict())})")
        metrics.skipped = True
        return metrics

    def train_step(self) -> StepMetrics:
        batch_l1, batch_l2 = next(self._batches["lang1"]), next(self._batches["lang2"])
        rng_states = self._rng_states()
        values = {name: p.values.copy() for name, p in self.model.parameters().items()}
        # step() rebinds moment arrays, so shallow copies are enough
        moments = (self.optimizer.t, dict(self.optimizer.m), dict(self.optimizer.v))

        graph = ComputeGraph()
        with graph:
            terms = denoising_terms(self.model, batch_l1, batch_l2, self.config.mode, self.config.spec,
                                    self.config.epsilon_at, self.corruption_rng, self.dropout_rng)
            bt = backtranslation_loss(self.model, batch_l1, batch_l2, self.dropout_rng)
            total = add(terms.total, bt)

        parts = terms.to_dict()
        metrics = StepMetrics(step=self.state.step + 1, denoising=parts["denoising"], word_at=parts["word_at"],
                              position_at=parts["position_at"], backtranslation=bt.item(), total=total.item(),
                              grad_norm=float("nan"))
        if not np.isfinite(metrics.total):
            return self._abort("non-finite loss", rng_states, values, metrics)

        graph.backward(total)
        metrics.grad_norm = clip_grad_norm(self.model.parameters(), self.config.clip_norm)
        if not np.isfinite(metrics.grad_norm):
            return self._abort("non-finite gradient", rng_states, values, metrics)
        self.optimizer.step()
        self.optimizer.zero_grad()
        if not all(np.isfinite(p.values).all() for p in self.model.parameters().values()):
            self.optimizer.t, self.optimizer.m, self.optimizer.v = moments
            return self._abort("non-finite parameters after the update", rng_states, values, metrics)

        self.state.step += 1
        self.state.update_averages({"denoising": metrics.denoising, "adversarial": metrics.adversarial,
                                    "backtranslation": metrics.backtranslation, "total": metrics.total})
        return metrics


@dataclass
class TrainResult:
    checkpoint: Path
    metrics_log: Path
    state: TrainState


def _save(path: Path, trainer: Trainer, vocab: Vocabulary, run_config: RunConfig) -> Path:
    state = trainer.sync_state()
    extra = {"train_state": state.to_header(), "run_config": flatten_run_config(run_config)}
    return save_checkpoint(path, trainer.model, vocab, extra=extra, arrays=state.to_arrays())


def _evaluate(trainer: Trainer, vocab: Vocabulary, eval_set: EvaluationSet) -> Dict[str, float]:
    translator = Translator(trainer.model, vocab)
    return {f"bleu_{direction}": evaluate_translation(translator, eval_set, direction).score
            for direction in ("l1_l2", "l2_l1")}


def train(run_config: RunConfig, bundle: CorpusBundle, out_dir: Union[str, Path],
          resume_from: Optional[Union[str, Path]] = None, prefetch: int = 0,
          eval_sentences: int = 200) -> TrainResult:
    """Run training until run_config.train.steps total steps; writes checkpoints, config and metrics log."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_config = run_config.train

    if resume_from is not None:
        checkpoint = load_checkpoint(resume_from)
        if "train_state" not in checkpoint.extra:
            raise CheckpointFormatError(f"{resume_from}: no training state to resume from")
        model, vocab = checkpoint.model, checkpoint.vocab
        state = TrainState.from_checkpoint(checkpoint.extra["train_state"], checkpoint.arrays)
        logger.info(f"Resuming from {resume_from} at step {state.step}")
    else:
        vocab = build_vocab([bundle.train_l1, bundle.train_l2])
        model_config = run_config.model.model_copy(update={"vocab_size": len(vocab)})
        model = TransformerModel(model_config, seed=derive_seed(train_config.seed, "model"),
                                 dtype=train_config.dtype)
        state = TrainState()

    run_config = run_config.model_copy(update={"model": model.config})
    (out_dir / CONFIG_NAME).write_text(dump_flat_config(run_config), encoding="utf-8")
    logger.info(f"Model: {model.parameter_count()} parameters, vocabulary {len(vocab)}, mode={train_config.mode.value}")

    max_len = model.config.max_len
    streams = [BatchStream(path, vocab, train_config.batch_size, max_len, language,
                           derive_seed(train_config.seed, f"stream.{language}"),
                           start=state.consumed.get(language, 0), prefetch=prefetch)
               for path, language in ((bundle.train_l1, "lang1"), (bundle.train_l2, "lang2"))]
    trainer = Trainer(model, train_config, streams[0], streams[1], state)
    eval_set = EvaluationSet.from_bundle(bundle, vocab, limit=eval_sentences)
    metrics_log = MetricsLog(out_dir / METRICS_NAME)
    checkpoint_path = out_dir / CHECKPOINT_NAME

    if trainer.state.step == 0:
        _save(checkpoint_path, trainer, vocab, run_config)

    while trainer.state.step < train_config.steps:
        metrics = trainer.train_step()
        if metrics.skipped:
            metrics_log.append({**metrics.to_dict(), 'event': 'rollback'})
            continue
        step = trainer.state.step
        metrics_log.append(metrics.to_dict())
        if step % train_config.log_every == 0:
            averages = " ".join(f"{k}={v:.4f}" for k, v in trainer.state.averages.items())
            logger.info(f"step {step}/{train_config.steps} {averages} grad_norm={metrics.grad_norm:.3f}")
        if train_config.eval_every and step % train_config.eval_every == 0:
            scores = _evaluate(trainer, vocab, eval_set)
            metrics_log.append({'step': step, 'event': 'eval', **scores})
            logger.info(f"step {step} eval " + " ".join(f"{k}={v:.2f}" for k, v in scores.items()))
        if train_config.checkpoint_every and step % train_config.checkpoint_every == 0:
            _save(out_dir / f"checkpoint_step{step}.npz", trainer, vocab, run_config)
            _save(checkpoint_path, trainer, vocab, run_config)

    _save(checkpoint_path, trainer, vocab, run_config)
    return TrainResult(checkpoint=checkpoint_path, metrics_log=metrics_log.path, state=trainer.state)
