"""Adversarial denoising losses.

Each adversarial term runs two passes over the same corrupted batch. The
first pass lives in its own graph and only yields the gradient at the
embedding injection point; the second pass adds the normalised gradient as
a constant delta and its loss joins the caller's graph.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..models import ATMode, Batch, NoiseSpec, Perturbation, PerturbationTarget
from ..noise.generators import corrupt_batch
from ..tensor import ComputeGraph, DiffArray, add
from ..translation.transformer import TransformerModel
from .perturbations import make_delta


def denoising_loss(model: TransformerModel, noisy: Batch, clean: Batch,
                   dropout_rng: Optional[np.random.Generator] = None) -> DiffArray:
    """-log P(clean | noisy) in the batch's own language."""
    encoded = model.encode(noisy, rng=dropout_rng)
    return model.decode_loss(encoded, clean, rng=dropout_rng)


def adversarial_perturbation(model: TransformerModel, noisy: Batch, clean: Batch, epsilon: float,
                             target: PerturbationTarget) -> Perturbation:
    graph = ComputeGraph()
    with graph:
        encoded = model.encode(noisy, track_embeddings=True)
        loss = model.decode_loss(encoded, clean)
    graph.backward(loss, inputs=[encoded.injection.word, encoded.injection.position])
    word_grad, position_grad = model.embedding_gradients(encoded)
    grad = word_grad if target is PerturbationTarget.WORD else position_grad
    return make_delta(grad, epsilon, target=target, mask=noisy.mask)


def perturbed_denoising_loss(model: TransformerModel, noisy: Batch, clean: Batch, epsilon: float,
                             target: PerturbationTarget,
                             dropout_rng: Optional[np.random.Generator] = None) -> DiffArray:
    delta = adversarial_perturbation(model, noisy, clean, epsilon, target)
    if target is PerturbationTarget.WORD:
        encoded = model.encode(noisy, word_delta=delta, rng=dropout_rng)
    else:
        encoded = model.encode(noisy, position_delta=delta, rng=dropout_rng)
    return model.decode_loss(encoded, clean, rng=dropout_rng)


def word_at_loss(model: TransformerModel, batch: Batch, spec: NoiseSpec, epsilon: float,
                 rng: np.random.Generator, dropout_rng: Optional[np.random.Generator] = None) -> DiffArray:
    return perturbed_denoising_loss(model, corrupt_batch(batch, spec, rng), batch, epsilon,
                                    PerturbationTarget.WORD, dropout_rng)


def position_at_loss(model: TransformerModel, batch: Batch, spec: NoiseSpec, epsilon: float,
                     rng: np.random.Generator, dropout_rng: Optional[np.random.Generator] = None) -> DiffArray:
    return perturbed_denoising_loss(model, corrupt_batch(batch, spec, rng), batch, epsilon,
                                    PerturbationTarget.POSITION, dropout_rng)


def _total(*terms: Optional[DiffArray]) -> DiffArray:
    present = [t for t in terms if t is not None]
    total = present[0]
    for term in present[1:]:
        total = add(total, term)
    return total


@dataclass
class DenoisingTerms:
    denoising: DiffArray              # L_D over both languages
    word: Optional[DiffArray]         # L_wx + L_wy
    position: Optional[DiffArray]     # L_px + L_py
    total: DiffArray

    @property
    def adversarial(self) -> float:
        return sum(t.item() for t in (self.word, self.position) if t is not None)

    def to_dict(self) -> Dict[str, float]:
        return {
            'denoising': self.denoising.item(),
            'word_at': self.word.item() if self.word is not None else 0.0,
            'position_at': self.position.item() if self.position is not None else 0.0,
            'total': self.total.item(),
        }


def denoising_terms(model: TransformerModel, batch_l1: Batch, batch_l2: Batch, mode: ATMode,
                    spec: NoiseSpec, epsilon: float, rng: np.random.Generator,
                    dropout_rng: Optional[np.random.Generator] = None) -> DenoisingTerms:
    """L_D plus the adversarial terms `mode` asks for, all on one corruption draw per language.

    Word and position deltas enter at the same embedding sum and get the same
    gradient, so without dropout the word and position terms are equal and
    both_at is L_D plus twice that term.
    """
    mode = ATMode(mode)
    pairs = [(corrupt_batch(batch, spec, rng), batch) for batch in (batch_l1, batch_l2)]

    denoising = _total(*(denoising_loss(model, noisy, clean, dropout_rng) for noisy, clean in pairs))
    word = position = None
    if mode.perturbs_words:
        word = _total(*(perturbed_denoising_loss(model, noisy, clean, epsilon, PerturbationTarget.WORD,
                                                 dropout_rng) for noisy, clean in pairs))
    if mode.perturbs_positions:
        position = _total(*(perturbed_denoising_loss(model, noisy, clean, epsilon, PerturbationTarget.POSITION,
                                                     dropout_rng) for noisy, clean in pairs))
    return DenoisingTerms(denoising=denoising, word=word, position=position,
                          total=_total(denoising, word, position))


def denoising_objective(model: TransformerModel, batch_l1: Batch, batch_l2: Batch, mode: ATMode,
                        spec: NoiseSpec, epsilon: float, rng: np.random.Generator,
                        dropout_rng: Optional[np.random.Generator] = None) -> DiffArray:
    return denoising_terms(model, batch_l1, batch_l2, mode, spec, epsilon, rng, dropout_rng).total
