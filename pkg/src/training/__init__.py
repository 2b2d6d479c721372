from .optimizer import Adam, clip_grad_norm, global_grad_norm
from .state import TrainState
from .metrics_log import MetricsLog, read_metrics, format_row
from .trainer import (Trainer, StepMetrics, TrainResult, train, backtranslation_loss, CHECKPOINT_NAME,
                      METRICS_NAME, CONFIG_NAME)

__all__ = ['Adam', 'clip_grad_norm', 'global_grad_norm', 'TrainState', 'MetricsLog', 'read_metrics',
           'format_row', 'Trainer', 'StepMetrics', 'TrainResult', 'train', 'backtranslation_loss',
           'CHECKPOINT_NAME', 'METRICS_NAME', 'CONFIG_NAME']
