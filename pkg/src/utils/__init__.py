from .config import (Config, ModelConfig, TrainConfig, RunConfig, load_config_file,
                     parse_flat_config, resolve_run_config, flatten_run_config, dump_flat_config)
from .logger import setup_logger, get_logger
from .seeding import derive_seed, component_rng
from .errors import (RobustUNMTError, ShapeError, GraphError, NonFiniteError, NoiseSpecError,
                     CorpusFormatError, VocabularyError, CheckpointNotFoundError,
                     CheckpointFormatError, ConfigError)

__all__ = ['Config', 'ModelConfig', 'TrainConfig', 'RunConfig', 'load_config_file',
           'parse_flat_config', 'resolve_run_config', 'flatten_run_config', 'dump_flat_config',
           'setup_logger', 'get_logger', 'derive_seed', 'component_rng',
           'RobustUNMTError', 'ShapeError', 'GraphError', 'NonFiniteError', 'NoiseSpecError',
           'CorpusFormatError', 'VocabularyError', 'CheckpointNotFoundError',
           'CheckpointFormatError', 'ConfigError']
