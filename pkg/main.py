#!/usr/bin/env python3
"""
Robust UNMT - Main Runner

Generates synthetic cipher language pairs, trains unsupervised translation
models with optional adversarial denoising (word_at, position_at, both_at),
translates files, and scores models under synthetic word and word-order noise.
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.data import REORDER_RULES, ToyLanguageSpec, generate_bundle, load_bundle
from src.evaluation import (DEFAULT_A_VALUES, DEFAULT_B_VALUES, DIRECTIONS, EvaluationSet, SweepVisualizer,
                            compare_sweeps, robustness_table, sweep, write_figure)
from src.models import ATMode, NoiseSpec
from src.noise import noisify_corpus, read_corpus
from src.training import train
from src.translation import Translator, load_checkpoint
from src.utils import (Config, ConfigError, RobustUNMTError, derive_seed, dump_flat_config, load_config_file,
                       resolve_run_config, setup_logger)
from src.utils.config import FLAT_KEYS


class PipelineRunner:
    def __init__(self, log_level: str = Config.LOG_LEVEL, seed: Optional[int] = None):
        self.logger = setup_logger(level=log_level.upper())
        self.seed = seed

    @property
    def base_seed(self) -> int:
        return self.seed if self.seed is not None else Config.DEFAULT_SEED

    def echo(self, command: str, settings: Dict[str, object]):
        """Log the fully resolved settings of a command, one key=value per line."""
        rendered = "".join(f"\n  {key}={value}" for key, value in sorted(settings.items()))
        self.logger.info(f"{command} with resolved settings:{rendered}")

    def load_translators(self, checkpoints: Sequence[str],
                         labels: Optional[Sequence[str]] = None) -> Dict[str, Translator]:
        """One translator per checkpoint, keyed by label; all must share one vocabulary."""
        if labels and len(labels) != len(checkpoints):
            raise ConfigError(f"{len(labels)} labels given for {len(checkpoints)} checkpoints")

        translators: Dict[str, Translator] = {}
        vocab = None
        for i, path in enumerate(checkpoints):
            checkpoint = load_checkpoint(path)
            if vocab is not None and checkpoint.vocab != vocab:
                raise ConfigError(f"{path} uses a different vocabulary than {checkpoints[0]}")
            vocab = checkpoint.vocab

            if labels:
                label = labels[i]
            else:
                label = str(checkpoint.extra.get("run_config", {}).get("mode", Path(path).stem))
            if label in translators:
                label = f"{label}.{i}"
            translators[label] = Translator(checkpoint.model, checkpoint.vocab)
            self.logger.info(f"Loaded {path} as {label!r} ({checkpoint.model.parameter_count()} parameters)")
        return translators

    def gen_data(self, args: argparse.Namespace):
        try:
            spec = ToyLanguageSpec(vocab_size=args.vocab_size, min_len=args.min_len, max_len=args.max_len,
                                   anchor_fraction=args.anchor_fraction, reorder_rule=args.reorder_rule)
        except ValidationError as exc:
            raise ConfigError(f"invalid toy language settings: {exc}") from exc
        seed = derive_seed(self.base_seed, "data")
        self.echo("gen-data", {**spec.model_dump(), "n_train": args.n_train, "n_test": args.n_test,
                               "seed": self.base_seed, "out": args.out})
        generate_bundle(spec, args.n_train, args.n_test, seed, args.out)

    def train(self, args: argparse.Namespace):
        file_values = load_config_file(args.config) if args.config else {}
        overrides = {key: getattr(args, key, None) for key in FLAT_KEYS if key != "seed"}
        overrides["seed"] = self.seed
        run_config = resolve_run_config(file_values, overrides)

        out_dir = Path(args.out)
        console_handlers = len(self.logger.handlers)
        setup_logger(level=self.logger.level, log_file=out_dir / "train.log")
        self.logger.info(f"train with resolved configuration:\n{dump_flat_config(run_config)}".rstrip())
        try:
            result = train(run_config, load_bundle(args.data), out_dir, resume_from=args.resume,
                           prefetch=args.prefetch, eval_sentences=args.eval_sentences)
        finally:
            for handler in self.logger.handlers[console_handlers:]:
                self.logger.removeHandler(handler)
                handler.close()
        self.logger.info(f"Training finished at step {result.state.step} "
                         f"({result.state.skipped_steps} rolled-back steps); checkpoint {result.checkpoint}")

    def translate(self, args: argparse.Namespace):
        source, target = DIRECTIONS[args.direction]
        self.echo("translate", {"checkpoint": args.checkpoint, "in": args.input, "direction": args.direction,
                                "out": args.out or "<stdout>", "batch_size": args.batch_size})
        checkpoint = load_checkpoint(args.checkpoint)
        translator = Translator(checkpoint.model, checkpoint.vocab, batch_size=args.batch_size)

        sentences = read_corpus(args.input)
        lines = [" ".join(tokens) for tokens in translator.translate_tokens(sentences, source, target)]
        text = "".join(line + "\n" for line in lines)
        if args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text, encoding="utf-8")
            self.logger.info(f"Wrote {len(lines)} translations to {out}")
        else:
            sys.stdout.write(text)

    def evaluate(self, args: argparse.Namespace):
        self.echo("evaluate", {"checkpoints": ",".join(args.checkpoint), "data": args.data, "a": args.a,
                               "b": args.b, "seed": self.base_seed, "limit": args.limit, "out": args.out})
        translators = self.load_translators(args.checkpoint, args.label)
        vocab = next(iter(translators.values())).vocab
        test_set = EvaluationSet.from_bundle(load_bundle(args.data), vocab, limit=args.limit)

        table = robustness_table(translators, test_set, a=args.a, b=args.b,
                                 seed=derive_seed(self.base_seed, "evaluation"))
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, index=False, float_format="%.4f")
        self.logger.info(f"Wrote robustness table ({len(table)} rows) to {out}")

        if args.html:
            visualizer = SweepVisualizer()
            for direction in DIRECTIONS:
                path = write_figure(visualizer.create_robustness_bars(table, direction),
                                    out.with_name(f"{out.stem}_{direction}.html"))
                self.logger.info(f"Wrote {path}")

    def sweep(self, args: argparse.Namespace):
        values = args.values if args.values else list(
            DEFAULT_A_VALUES if args.axis == "a" else DEFAULT_B_VALUES)
        self.echo("sweep", {"checkpoints": ",".join(args.checkpoint), "data": args.data, "axis": args.axis,
                            "values": ",".join(f"{v:g}" for v in values), "seed": self.base_seed,
                            "limit": args.limit, "out_dir": args.out_dir})
        translators = self.load_translators(args.checkpoint, args.label)
        vocab = next(iter(translators.values())).vocab
        test_set = EvaluationSet.from_bundle(load_bundle(args.data), vocab, limit=args.limit)

        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        seed = derive_seed(self.base_seed, "evaluation")
        results = []
        for label, translator in translators.items():
            result = sweep(translator, test_set, args.axis, values, seed=seed, label=label)
            path = out_dir / f"sweep_{args.axis}_{label}.csv"
            result.to_csv(path)
            self.logger.info(f"Wrote {path}")
            results.append(result)

        if len(results) > 1:
            path = out_dir / f"sweep_{args.axis}_comparison.csv"
            compare_sweeps(results).to_csv(path, index=False, float_format="%.4f")
            self.logger.info(f"Wrote {path}")
        if args.html:
            path = write_figure(SweepVisualizer().create_sweep_figure(results),
                                out_dir / f"sweep_{args.axis}.html")
            self.logger.info(f"Wrote {path}")

    def noisify(self, args: argparse.Namespace):
        try:
            spec = NoiseSpec(a=args.a, b=args.b, seed=derive_seed(self.base_seed, "evaluation"))
        except ValidationError as exc:
            raise ConfigError(f"invalid noise levels: {exc}") from exc
        self.echo("noisify", {"in": args.input, "out": args.out, "a": args.a, "b": args.b,
                              "seed": self.base_seed})
        noisify_corpus(args.input, spec, args.out)

    def dispatch(self, args: argparse.Namespace):
        handlers = {
            "gen-data": self.gen_data,
            "train": self.train,
            "translate": self.translate,
            "evaluate": self.evaluate,
            "sweep": self.sweep,
            "noisify": self.noisify,
        }
        handlers[args.command](args)


def parse_values(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Robust unsupervised translation with adversarial denoising")
    parser.add_argument("--log-level", default=Config.LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "debug", "info", "warning", "error"],
                        help="Logging level")
    parser.add_argument("--seed", type=int, default=None,
                        help="Base seed; every component seed is derived from it")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="Generate a synthetic cipher language bundle")
    gen.add_argument("--out", required=True, help="Bundle directory")
    gen.add_argument("--vocab-size", type=int, default=200)
    gen.add_argument("--n-train", type=int, default=20000, help="Monolingual sentences per language")
    gen.add_argument("--n-test", type=int, default=500, help="Parallel test pairs")
    gen.add_argument("--min-len", type=int, default=3)
    gen.add_argument("--max-len", type=int, default=11)
    gen.add_argument("--anchor-fraction", type=float, default=0.2)
    gen.add_argument("--reorder-rule", choices=REORDER_RULES, default="adjective_noun")

    trn = commands.add_parser("train", help="Train a model on a bundle")
    trn.add_argument("--data", required=True, help="Bundle directory")
    trn.add_argument("--out", default=Config.OUTPUT_DIR, help="Run directory")
    trn.add_argument("--config", help="Flat key=value configuration file")
    trn.add_argument("--resume", help="Checkpoint to resume from")
    trn.add_argument("--prefetch", type=int, default=Config.default_prefetch(), help="Batch prefetch queue depth")
    trn.add_argument("--eval-sentences", type=int, default=200, help="Test pairs scored during training")
    for key in sorted(FLAT_KEYS - {"seed"}):
        if key == "mode":
            trn.add_argument("--mode", choices=[m.value for m in ATMode], default=None)
        else:
            trn.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                             help=f"Override {key} from the config file")

    tr = commands.add_parser("translate", help="Translate a tokenized file")
    tr.add_argument("--in", dest="input", required=True, help="One tokenized sentence per line")
    tr.add_argument("--checkpoint", required=True)
    tr.add_argument("--direction", choices=sorted(DIRECTIONS), default="l1_l2")
    tr.add_argument("--out", help="Output file (stdout when omitted)")
    tr.add_argument("--batch-size", type=int, default=64)

    ev = commands.add_parser("evaluate", help="Clean / word / order / combined noise table")
    ev.add_argument("--checkpoint", nargs="+", required=True)
    ev.add_argument("--label", nargs="+", help="One label per checkpoint")
    ev.add_argument("--data", required=True, help="Bundle directory")
    ev.add_argument("--a", type=float, default=0.1, help="Word noise level")
    ev.add_argument("--b", type=float, default=3.0, help="Word-order noise level")
    ev.add_argument("--limit", type=int, default=None, help="Score only the first N test pairs")
    ev.add_argument("--out", default="robustness.csv")
    ev.add_argument("--html", action="store_true", help="Also write bar charts")

    sw = commands.add_parser("sweep", help="BLEU along one noise axis")
    sw.add_argument("--axis", choices=["a", "b"], required=True)
    sw.add_argument("--values", type=parse_values, help="Comma-separated, strictly increasing noise levels")
    sw.add_argument("--checkpoint", nargs="+", required=True)
    sw.add_argument("--label", nargs="+", help="One label per checkpoint")
    sw.add_argument("--data", required=True, help="Bundle directory")
    sw.add_argument("--limit", type=int, default=None, help="Score only the first N test pairs")
    sw.add_argument("--out-dir", default="sweeps")
    sw.add_argument("--html", action="store_true", help="Also write the sweep figure")

    nz = commands.add_parser("noisify", help="Write a noised copy of a corpus")
    nz.add_argument("--in", dest="input", required=True)
    nz.add_argument("--out", required=True)
    nz.add_argument("--a", type=float, default=0.0)
    nz.add_argument("--b", type=float, default=0.0)

    return parser


def report_error(category: str, message: object):
    text = " ".join(str(message).split())
    sys.stderr.write(f"error category={category} message={text}\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    Config.validate()
    runner = PipelineRunner(args.log_level, args.seed)
    try:
        runner.dispatch(args)
    except RobustUNMTError as exc:
        runner.logger.error(f"{args.command} failed: {exc}")
        report_error(exc.category, exc)
        return 1
    except OSError as exc:
        runner.logger.error(f"{args.command} failed: {exc}")
        report_error("io-error", exc)
        return 1
    except ValueError as exc:
        runner.logger.error(f"{args.command} failed: {exc}")
        report_error("invalid-value", exc)
        return 1
    except Exception as exc:
        runner.logger.exception(f"{args.command} failed unexpectedly")
        report_error("internal", exc)
        return 1
    runner.logger.info(f"{args.command} completed")
    return 0


if __name__ == "__main__":
    sys.exit(run())
