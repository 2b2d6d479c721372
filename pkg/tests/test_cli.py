import logging

import pandas as pd
import pytest

from main import run
from src.models import SWEEP_COLUMNS
from src.translation import load_checkpoint
from src.utils import Config
from src.utils.logger import LOGGER_NAME

TINY_FLAGS = ["--n-layers", "1", "--d-model", "8", "--n-heads", "2", "--d-ff", "16", "--max-len", "10",
              "--batch-size", "4", "--dtype", "float64", "--eval-every", "0", "--checkpoint-every", "0",
              "--log-every", "1"]


@pytest.fixture(autouse=True)
def reset_logger():
    yield
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run(["--seed", "3", "gen-data", "--out", str(root / "bundle"), "--vocab-size", "40",
                "--n-train", "60", "--n-test", "12", "--max-len", "6"]) == 0
    assert run(["--seed", "3", "train", "--data", str(root / "bundle"), "--out", str(root / "run"),
                "--steps", "2", "--mode", "word_at", *TINY_FLAGS]) == 0
    return root


def test_gen_data_writes_a_bundle(workspace):
    bundle = workspace / "bundle"
    for name in ("train.l1", "train.l2", "test.l1", "test.l2", "manifest.txt"):
        assert (bundle / name).is_file()
    assert len((bundle / "test.l2").read_text(encoding="utf-8").splitlines()) == 12


def test_train_writes_run_directory(workspace):
    run_dir = workspace / "run"
    for name in ("checkpoint.npz", "metrics.log", "config.txt", "train.log"):
        assert (run_dir / name).is_file()
    checkpoint = load_checkpoint(run_dir / "checkpoint.npz")
    assert checkpoint.extra["train_state"]["step"] == 2
    assert checkpoint.extra["run_config"]["mode"] == "word_at"
    assert checkpoint.extra["run_config"]["seed"] == 3
    assert "mode=word_at" in (run_dir / "config.txt").read_text(encoding="utf-8")


def test_translate_writes_one_line_per_input(workspace, tmp_path):
    source = tmp_path / "input.l1"
    lines = (workspace / "bundle" / "test.l1").read_text(encoding="utf-8").splitlines()[:4]
    source.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    out = tmp_path / "out" / "translated.l2"
    assert run(["translate", "--in", str(source), "--checkpoint", str(workspace / "run" / "checkpoint.npz"),
                "--direction", "l1_l2", "--out", str(out)]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 4


def test_translate_with_missing_checkpoint_fails_cleanly(tmp_path, capsys):
    source = tmp_path / "input.l1"
    source.write_text("a b\n", encoding="utf-8")
    code = run(["translate", "--in", str(source), "--checkpoint", str(tmp_path / "absent.npz")])
    assert code == 1
    assert "error category=checkpoint-not-found" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["translate", "--in", "x.txt"],
    ["sweep", "--axis", "c", "--checkpoint", "m.npz", "--data", "d"],
    ["sweep", "--axis", "a", "--values", "0,x", "--checkpoint", "m.npz", "--data", "d"],
    ["train", "--data", "d", "--mode", "adversarial"],
])
def test_usage_errors_exit_with_two(argv):
    assert run(argv) == 2


def test_evaluate_writes_robustness_table(workspace, tmp_path):
    checkpoint = str(workspace / "run" / "checkpoint.npz")
    out = tmp_path / "robustness.csv"
    assert run(["evaluate", "--checkpoint", checkpoint, checkpoint, "--label", "first", "second",
                "--data", str(workspace / "bundle"), "--limit", "6", "--out", str(out), "--html"]) == 0
    table = pd.read_csv(out)
    assert table["model"].tolist() == ["first"] * 4 + ["second"] * 4
    assert (tmp_path / "robustness_l1_l2.html").is_file()


def test_evaluate_rejects_label_count_mismatch(workspace, tmp_path, capsys):
    checkpoint = str(workspace / "run" / "checkpoint.npz")
    code = run(["evaluate", "--checkpoint", checkpoint, "--label", "one", "two",
                "--data", str(workspace / "bundle"), "--out", str(tmp_path / "r.csv")])
    assert code == 1
    assert "category=config-error" in capsys.readouterr().err


def test_sweep_writes_one_csv_per_model_and_a_comparison(workspace, tmp_path):
    checkpoint = str(workspace / "run" / "checkpoint.npz")
    out_dir = tmp_path / "sweeps"
    assert run(["sweep", "--axis", "b", "--values", "0,2,5", "--checkpoint", checkpoint, checkpoint,
                "--data", str(workspace / "bundle"), "--limit", "6", "--out-dir", str(out_dir), "--html"]) == 0

    # both checkpoints carry the same mode, so the second label gets an index
    first = pd.read_csv(out_dir / "sweep_b_word_at.csv", comment="#")
    assert list(first.columns) == ["b", *SWEEP_COLUMNS]
    assert first["b"].tolist() == [0.0, 2.0, 5.0]
    assert (out_dir / "sweep_b_word_at.1.csv").is_file()
    comparison = pd.read_csv(out_dir / "sweep_b_comparison.csv")
    assert (comparison["gap.word_at.1.translation_l1_l2"] == 0.0).all()
    assert (out_dir / "sweep_b.html").is_file()


def test_sweep_rejects_non_increasing_levels(workspace, tmp_path, capsys):
    code = run(["sweep", "--axis", "a", "--values", "0.1,0.05", "--checkpoint",
                str(workspace / "run" / "checkpoint.npz"), "--data", str(workspace / "bundle"),
                "--out-dir", str(tmp_path)])
    assert code == 1
    assert "category=invalid-value" in capsys.readouterr().err


def test_noisify_copies_without_noise(workspace, tmp_path):
    source = workspace / "bundle" / "test.l1"
    out = tmp_path / "noised.l1"
    assert run(["noisify", "--in", str(source), "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == source.read_text(encoding="utf-8")


def test_noisify_rejects_out_of_range_level(workspace, tmp_path, capsys):
    code = run(["noisify", "--in", str(workspace / "bundle" / "test.l1"), "--out", str(tmp_path / "n.txt"),
                "--a", "1.5"])
    assert code == 1
    assert "category=config-error" in capsys.readouterr().err


def test_unknown_config_key_is_a_config_error(workspace, tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("steps=1\nlearning_rate=0.1\n", encoding="utf-8")
    code = run(["train", "--data", str(workspace / "bundle"), "--out", str(tmp_path / "run"),
                "--config", str(config)])
    assert code == 1
    err = capsys.readouterr().err
    assert "category=config-error" in err
    assert "learning_rate" in err


def test_config_file_values_yield_to_flags(workspace, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("# tiny run\nsteps=5\nmode=both_at\n", encoding="utf-8")
    out = tmp_path / "run"
    assert run(["train", "--data", str(workspace / "bundle"), "--out", str(out), "--config", str(config),
                "--steps", "1", *TINY_FLAGS]) == 0
    checkpoint = load_checkpoint(out / "checkpoint.npz")
    assert checkpoint.extra["train_state"]["step"] == 1
    assert checkpoint.extra["run_config"]["mode"] == "both_at"


def test_missing_bundle_is_a_corpus_error(tmp_path, capsys):
    code = run(["train", "--data", str(tmp_path / "nowhere"), "--out", str(tmp_path / "run"), "--steps", "1"])
    assert code == 1
    assert "category=corpus-format" in capsys.readouterr().err


def test_identical_invocations_write_identical_artifacts(workspace, tmp_path):
    checkpoint = str(workspace / "run" / "checkpoint.npz")
    for name in ("first", "second"):
        assert run(["--seed", "4", "train", "--data", str(workspace / "bundle"), "--out", str(tmp_path / name),
                    "--steps", "2", "--mode", "both_at", *TINY_FLAGS]) == 0
        assert run(["--seed", "4", "sweep", "--axis", "a", "--values", "0,0.2", "--checkpoint", checkpoint,
                    "--data", str(workspace / "bundle"), "--limit", "6", "--out-dir", str(tmp_path / name)]) == 0
        assert run(["--seed", "4", "evaluate", "--checkpoint", checkpoint, "--data", str(workspace / "bundle"),
                    "--limit", "6", "--out", str(tmp_path / name / "robustness.csv")]) == 0

    def rows(path):
        return [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]

    assert rows(tmp_path / "first" / "metrics.log") == rows(tmp_path / "second" / "metrics.log")
    for name in ("sweep_a_word_at.csv", "robustness.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_train_without_seed_flag_uses_environment_seed(workspace, tmp_path, monkeypatch):
    monkeypatch.setattr(Config, "DEFAULT_SEED", 21)
    out = tmp_path / "run"
    assert run(["train", "--data", str(workspace / "bundle"), "--out", str(out), "--steps", "1", *TINY_FLAGS]) == 0
    assert load_checkpoint(out / "checkpoint.npz").extra["run_config"]["seed"] == 21
