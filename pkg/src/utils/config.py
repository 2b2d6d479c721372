import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..models.noise_spec import NoiseSpec
from ..models.perturbation import ATMode
from .errors import ConfigError

load_dotenv()


class Config:
    # Output
    OUTPUT_DIR = os.getenv("ROBUST_UNMT_OUTPUT_DIR", "./runs")
    LOG_LEVEL = os.getenv("ROBUST_UNMT_LOG_LEVEL", "INFO")

    # Reproducibility / numerics
    DEFAULT_SEED = int(os.getenv("ROBUST_UNMT_SEED", "1234"))
    DTYPE = os.getenv("ROBUST_UNMT_DTYPE", "float32")

    # Batch prefetch queue depth, 0 disables the producer thread
    PREFETCH = int(os.getenv("ROBUST_UNMT_PREFETCH", "0"))

    @classmethod
    def validate(cls) -> bool:
        problems = []

        if cls.DTYPE not in ("float32", "float64"):
            problems.append(f"ROBUST_UNMT_DTYPE={cls.DTYPE!r}")

        if cls.PREFETCH < 0:
            problems.append(f"ROBUST_UNMT_PREFETCH={cls.PREFETCH}")

        if problems:
            print(f"Warning: unusable environment values: {', '.join(problems)}")
            print("Falling back to float32 and no prefetching.")
            return False

        return True

    @classmethod
    def default_dtype(cls) -> str:
        return cls.DTYPE if cls.DTYPE in ("float32", "float64") else "float32"

    @classmethod
    def default_prefetch(cls) -> int:
        return max(cls.PREFETCH, 0)


class ModelConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_layers: int = Field(2, ge=1)
    d_model: int = Field(64, ge=1)
    n_heads: int = Field(4, ge=1)
    d_ff: int = Field(256, ge=1)
    max_len: int = Field(32, ge=3)
    vocab_size: int = Field(0, ge=0)
    dropout: float = Field(0.0, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _heads_divide_width(self) -> "ModelConfig":
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}")
        return self

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: ATMode = ATMode.NONE
    steps: int = Field(5000, ge=0)
    batch_size: int = Field(16, ge=1)
    lr: float = Field(5e-4, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.98, ge=0.0, lt=1.0)
    adam_eps: float = Field(1e-8, gt=0.0)
    epsilon_at: float = Field(1.0, ge=0.0)
    spec: NoiseSpec = Field(default_factory=NoiseSpec)
    seed: int = Field(default_factory=lambda: Config.DEFAULT_SEED)
    checkpoint_every: int = Field(1000, ge=0)
    eval_every: int = Field(500, ge=0)
    log_every: int = Field(50, ge=1)
    clip_norm: float = Field(5.0, gt=0.0)
    dtype: str = Field(default_factory=Config.default_dtype)

    @field_validator("dtype")
    @classmethod
    def _known_dtype(cls, value: str) -> str:
        if value not in ("float32", "float64"):
            raise ValueError(f"dtype must be float32 or float64, got {value!r}")
        return value


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)


_MODEL_KEYS = set(ModelConfig.model_fields) - {"vocab_size"}
_NOISE_KEYS = set(NoiseSpec.model_fields) - {"seed"}
_TRAIN_KEYS = set(TrainConfig.model_fields) - {"spec"}
FLAT_KEYS = frozenset(_MODEL_KEYS | _NOISE_KEYS | _TRAIN_KEYS)


def parse_flat_config(text: str, source: str = "<string>") -> Dict[str, str]:
    """Parse `key=value` lines; `#` starts a comment."""
    values: Dict[str, str] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_number}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in FLAT_KEYS:
            raise ConfigError(f"{source}:{line_number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{line_number}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_flat_config(path.read_text(encoding="utf-8"), source=str(path))


def resolve_run_config(file_values: Optional[Mapping[str, Any]] = None,
                       overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Defaults < file values < overrides (None overrides are ignored)."""
    merged: Dict[str, Any] = dict(file_values or {})
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in FLAT_KEYS:
            raise ConfigError(f"unknown override {key!r}")
        merged[key] = value

    model_values = {k: v for k, v in merged.items() if k in _MODEL_KEYS}
    noise_values = {k: v for k, v in merged.items() if k in _NOISE_KEYS}
    train_values = {k: v for k, v in merged.items() if k in _TRAIN_KEYS}

    try:
        seed = TrainConfig.model_validate(train_values).seed
        spec = NoiseSpec.model_validate({**noise_values, "seed": seed})
        train = TrainConfig.model_validate({**train_values, "spec": spec})
        model = ModelConfig.model_validate(model_values)
    except ValidationError as exc:
        offending = ", ".join(".".join(str(p) for p in err["loc"]) or "config" for err in exc.errors())
        raise ConfigError(f"invalid configuration ({offending}): {exc}") from exc

    return RunConfig(model=model, train=train)


def flatten_run_config(config: RunConfig) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key in sorted(_MODEL_KEYS):
        flat[key] = getattr(config.model, key)
    for key in sorted(_NOISE_KEYS):
        flat[key] = getattr(config.train.spec, key)
    for key in sorted(_TRAIN_KEYS):
        value = getattr(config.train, key)
        flat[key] = value.value if isinstance(value, ATMode) else value
    return dict(sorted(flat.items()))


def dump_flat_config(config: RunConfig) -> str:
    return "".join(f"{key}={value}\n" for key, value in flatten_run_config(config).items())
