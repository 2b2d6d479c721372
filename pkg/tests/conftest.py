import numpy as np
import pytest

from src.data import ToyLanguageSpec, generate_bundle
from src.models import Batch, Vocabulary
from src.translation import TransformerModel
from src.utils import ModelConfig, resolve_run_config

TINY_RUN = {
    "n_layers": 1,
    "d_model": 8,
    "n_heads": 2,
    "d_ff": 16,
    "max_len": 10,
    "batch_size": 4,
    "dtype": "float64",
    "log_every": 1,
    "eval_every": 0,
    "checkpoint_every": 0,
}


@pytest.fixture
def vocab():
    return Vocabulary([f"w{i}" for i in range(20)])


@pytest.fixture
def model_config(vocab):
    return ModelConfig(n_layers=2, d_model=16, n_heads=2, d_ff=32, max_len=12, vocab_size=len(vocab))


@pytest.fixture
def model(model_config):
    return TransformerModel(model_config, seed=3, dtype="float64")


@pytest.fixture
def batch(vocab):
    return Batch.from_sentences([[6, 7, 8, 9], [10, 11], [12, 13, 14], [15, 16, 17, 18, 19]], vocab, "lang1")


@pytest.fixture
def batch_l2(vocab):
    return Batch.from_sentences([[20, 21, 22], [23, 24, 25, 6], [7, 8], [9, 10, 11, 12]], vocab, "lang2")


@pytest.fixture
def toy_bundle(tmp_path):
    spec = ToyLanguageSpec(vocab_size=40, max_len=6)
    return generate_bundle(spec, n_train=60, n_test=20, seed=5, directory=tmp_path / "bundle")


@pytest.fixture
def tiny_run_config():
    def build(**overrides):
        return resolve_run_config(TINY_RUN, overrides)
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(0)
