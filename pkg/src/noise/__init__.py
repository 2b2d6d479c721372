from .generators import (word_noise, word_noise_events, order_noise, corrupt, corrupt_batch,
                         apply_test_noise)
from .corpus import NoiseSummary, noisify_corpus, read_corpus, line_rng

__all__ = ['word_noise', 'word_noise_events', 'order_noise', 'corrupt', 'corrupt_batch',
           'apply_test_noise', 'NoiseSummary', 'noisify_corpus', 'read_corpus', 'line_rng']
