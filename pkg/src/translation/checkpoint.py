"""Single-file `.npz` checkpoints.

Layout:
    header          JSON: format, version, dtype, model config, caller extras
    vocab           content tokens in id order (specials are implied)
    manifest        JSON: parameter name -> {shape, dtype}
    param/<name>    parameter values
    <group>/<name>  extra per-parameter arrays (optimizer moments)
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..models import Vocabulary
from ..utils.config import ModelConfig
from ..utils.errors import CheckpointFormatError, CheckpointNotFoundError, ShapeError
from ..utils.logger import get_logger
from .transformer import TransformerModel

logger = get_logger("translation.checkpoint")

FORMAT_NAME = "robust-unmt-checkpoint"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    model: TransformerModel
    vocab: Vocabulary
    extra: Dict[str, Any] = field(default_factory=dict)
    arrays: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)


def _text_array(text: str) -> np.ndarray:
    return np.array(text)


def save_checkpoint(path: Union[str, Path], model: TransformerModel, vocab: Vocabulary,
                    extra: Optional[Dict[str, Any]] = None,
                    arrays: Optional[Dict[str, Dict[str, np.ndarray]]] = None) -> Path:
    path = Path(path)
    if len(vocab) != model.config.vocab_size:
        raise ShapeError("save_checkpoint", (len(vocab),), (model.config.vocab_size,))

    state = model.state_dict()
    header = {
        'format': FORMAT_NAME,
        'version': FORMAT_VERSION,
        'dtype': model.dtype.name,
        'model_config': model.config.model_dump(),
        'extra': extra or {},
    }
    manifest = {name: {'shape': list(v.shape), 'dtype': v.dtype.name} for name, v in state.items()}

    payload: Dict[str, np.ndarray] = {
        'header': _text_array(json.dumps(header, sort_keys=True)),
        'vocab': np.array(vocab.tokens, dtype=str),
        'manifest': _text_array(json.dumps(manifest, sort_keys=True)),
    }
    for name, values in state.items():
        payload[f"param/{name}"] = values
    for group, named in (arrays or {}).items():
        for name, values in named.items():
            payload[f"{group}/{name}"] = np.asarray(values)

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("wb") as handle:
        np.savez(handle, **payload)
    os.replace(tmp, path)
    logger.info(f"Saved checkpoint {path} ({model.parameter_count()} parameters)")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointNotFoundError(f"checkpoint not found: {path}")

    try:
        with np.load(path, allow_pickle=False) as archive:
            contents = {key: archive[key] for key in archive.files}
    except (OSError, ValueError) as exc:
        raise CheckpointFormatError(f"{path}: not a readable checkpoint ({exc})") from exc

    try:
        header = json.loads(str(contents.pop("header")))
        manifest = json.loads(str(contents.pop("manifest")))
        tokens = [str(t) for t in contents.pop("vocab").tolist()]
    except (KeyError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: missing or corrupt header ({exc})") from exc
    if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
        raise CheckpointFormatError(f"{path}: unsupported format {header.get('format')!r} "
                                    f"version {header.get('version')!r}")

    vocab = Vocabulary(tokens)
    config = ModelConfig.model_validate(header["model_config"])
    model = TransformerModel(config, dtype=header["dtype"])

    params: Dict[str, np.ndarray] = {}
    arrays: Dict[str, Dict[str, np.ndarray]] = {}
    for key, values in contents.items():
        group, _, name = key.partition("/")
        if group == "param":
            params[name] = values
        else:
            arrays.setdefault(group, {})[name] = values

    if set(params) != set(manifest):
        raise CheckpointFormatError(f"{path}: parameters disagree with the manifest")
    for name, entry in manifest.items():
        if list(params[name].shape) != entry["shape"] or params[name].dtype.name != entry["dtype"]:
            raise CheckpointFormatError(f"{path}: {name} does not match its manifest entry {entry}")
    try:
        model.load_state_dict(params)
    except ShapeError as exc:
        raise CheckpointFormatError(f"{path}: {exc}") from exc

    logger.info(f"Loaded checkpoint {path} (vocab {len(vocab)}, {model.parameter_count()} parameters)")
    return Checkpoint(model=model, vocab=vocab, extra=header.get("extra", {}), arrays=arrays)
