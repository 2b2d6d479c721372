from .bleu import bleu, corpus_statistics, ngram_counts
from .evaluator import (EvaluationSet, DIRECTIONS, evaluate_translation, evaluate_autoencoder, similarity,
                        score_noise_level, clean_translations, noised_sources, least_squares_slope)
from .sweep import (sweep, robustness_table, compare_sweeps, level_seed, DEFAULT_A_VALUES,
                    DEFAULT_B_VALUES, ROBUSTNESS_SCENARIOS)
from .visualizer import SweepVisualizer, sweep_figure, write_figure

__all__ = ['bleu', 'corpus_statistics', 'ngram_counts', 'EvaluationSet', 'DIRECTIONS',
           'evaluate_translation', 'evaluate_autoencoder', 'similarity', 'score_noise_level',
           'clean_translations', 'noised_sources', 'least_squares_slope', 'sweep', 'robustness_table',
           'compare_sweeps', 'level_seed', 'DEFAULT_A_VALUES', 'DEFAULT_B_VALUES',
           'ROBUSTNESS_SCENARIOS', 'SweepVisualizer', 'sweep_figure', 'write_figure']
