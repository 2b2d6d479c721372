from .perturbations import make_delta
from .objectives import (DenoisingTerms, denoising_loss, adversarial_perturbation, perturbed_denoising_loss,
                         word_at_loss, position_at_loss, denoising_terms, denoising_objective)

__all__ = ['make_delta', 'DenoisingTerms', 'denoising_loss', 'adversarial_perturbation',
           'perturbed_denoising_loss', 'word_at_loss', 'position_at_loss', 'denoising_terms',
           'denoising_objective']
