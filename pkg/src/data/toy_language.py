"""Synthetic cipher language pairs.

lang1 sentences come from a small template grammar over word categories.
lang2 is lang1 under a reorder rule followed by a per-token bijective cipher;
a fraction of tokens (anchors) keep their surface form in both languages.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..noise.corpus import read_corpus
from ..utils.errors import CorpusFormatError, VocabularyError
from ..utils.logger import get_logger

logger = get_logger("data.toy_language")

CATEGORIES = ("det", "adj", "noun", "verb", "prep", "adv")
CATEGORY_SHARE = {"det": 0.04, "adj": 0.25, "noun": 0.40, "verb": 0.20, "prep": 0.05, "adv": 0.06}

TEMPLATES: Tuple[Tuple[str, ...], ...] = (
    ("det", "noun", "verb"),
    ("det", "adj", "noun", "verb"),
    ("det", "noun", "verb", "adv"),
    ("det", "noun", "verb", "det", "noun"),
    ("det", "adj", "noun", "verb", "det", "noun"),
    ("det", "noun", "verb", "det", "adj", "noun"),
    ("det", "adj", "noun", "verb", "det", "adj", "noun"),
    ("det", "noun", "verb", "prep", "det", "noun"),
    ("det", "adj", "noun", "verb", "adv", "prep", "det", "noun"),
    ("det", "noun", "verb", "det", "adj", "noun", "prep", "det", "noun"),
    ("det", "adj", "noun", "verb", "det", "noun", "prep", "det", "adj", "noun"),
    ("det", "adj", "noun", "prep", "det", "noun", "verb", "det", "adj", "noun", "adv"),
)

REORDER_RULES = ("identity", "pair_swap", "adjective_noun")

FILES = {"train_l1": "train.l1", "train_l2": "train.l2", "test_l1": "test.l1", "test_l2": "test.l2"}
MANIFEST = "manifest.txt"
MAX_DRAWS_PER_SENTENCE = 50


class ToyLanguageSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    vocab_size: int = Field(200, ge=1)
    min_len: int = Field(3, ge=1)
    max_len: int = Field(11, ge=1)
    anchor_fraction: float = Field(0.2, ge=0.0, le=1.0)
    reorder_rule: str = "adjective_noun"

    @model_validator(mode="after")
    def _check(self) -> "ToyLanguageSpec":
        if self.min_len > self.max_len:
            raise ValueError(f"min_len={self.min_len} exceeds max_len={self.max_len}")
        if self.reorder_rule not in REORDER_RULES:
            raise ValueError(f"reorder_rule must be one of {REORDER_RULES}, got {self.reorder_rule!r}")
        return self

    def templates(self) -> List[Tuple[str, ...]]:
        return [t for t in TEMPLATES if self.min_len <= len(t) <= self.max_len]


def reorder(categories: Sequence[str], rule: str, inverse: bool = False) -> List[int]:
    """Source index for every output position; moves no token by more than 2.

    `inverse` gives the order that undoes the rule when `categories` are in
    rule-applied (lang2) order.
    """
    n = len(categories)
    order = list(range(n))
    if rule == "pair_swap":
        for i in range(0, n - 1, 2):
            order[i], order[i + 1] = order[i + 1], order[i]
    elif rule == "adjective_noun":
        i = 0
        while i < n - 1:
            first, second = ("noun", "adj") if inverse else ("adj", "noun")
            if categories[i] == first and categories[i + 1] == second:
                order[i], order[i + 1] = order[i + 1], order[i]
                i += 2
            else:
                i += 1
    elif rule != "identity":
        raise ValueError(f"unknown reorder rule {rule!r}")
    return order


class ToyLanguagePair:
    """Lexicon, cipher and grammar of one generated language pair."""

    def __init__(self, spec: ToyLanguageSpec, rng: np.random.Generator):
        if spec.vocab_size < len(CATEGORIES):
            raise VocabularyError(f"vocab_size={spec.vocab_size} cannot cover {len(CATEGORIES)} word categories")
        if not spec.templates():
            raise VocabularyError(f"no sentence template has length in [{spec.min_len}, {spec.max_len}]")
        self.spec = spec
        self.lexicon: Dict[str, List[str]] = {}
        sizes = self._category_sizes(spec.vocab_size)
        for category in CATEGORIES:
            self.lexicon[category] = [f"{category}{i}" for i in range(sizes[category])]

        self.category_of: Dict[str, str] = {w: c for c, words in self.lexicon.items() for w in words}
        words = [w for c in CATEGORIES for w in self.lexicon[c]]
        n_anchors = int(round(spec.anchor_fraction * len(words)))
        anchors = set(rng.choice(len(words), size=n_anchors, replace=False).tolist()) if n_anchors else set()
        self.anchors = sorted(words[i] for i in anchors)

        self.cipher: Dict[str, str] = {}
        for category in CATEGORIES:
            members = [w for w in self.lexicon[category] if w not in self.anchors]
            images = [f"{category.upper()}{i}" for i in rng.permutation(len(members))]
            self.cipher.update(zip(members, images))
        self.cipher.update({w: w for w in self.anchors})
        self.decipher = {v: k for k, v in self.cipher.items()}
        if len(self.decipher) != len(self.cipher):
            raise VocabularyError("cipher is not a bijection")

    @staticmethod
    def _category_sizes(vocab_size: int) -> Dict[str, int]:
        sizes = {c: max(1, int(CATEGORY_SHARE[c] * vocab_size)) for c in CATEGORIES}
        sizes["noun"] += vocab_size - sum(sizes.values())
        if sizes["noun"] < 1:
            raise VocabularyError(f"vocab_size={vocab_size} is too small for the grammar")
        return sizes

    def capacity(self) -> int:
        """Number of distinct lang1 sentences the grammar can produce."""
        total = 0
        for template in self.spec.templates():
            count = 1
            for category in template:
                count *= len(self.lexicon[category])
            total += count
        return total

    def sample(self, rng: np.random.Generator) -> List[str]:
        templates = self.spec.templates()
        template = templates[int(rng.integers(len(templates)))]
        return [self.lexicon[c][int(rng.integers(len(self.lexicon[c])))] for c in template]

    def translate(self, sentence: Sequence[str]) -> List[str]:
        """lang1 -> lang2: reorder by category, then encipher token-wise."""
        order = reorder([self.category_of[w] for w in sentence], self.spec.reorder_rule)
        return [self.cipher[sentence[i]] for i in order]

    def inverse(self, sentence: Sequence[str]) -> List[str]:
        """lang2 -> lang1."""
        plain = [self.decipher[w] for w in sentence]
        order = reorder([self.category_of[w] for w in plain], self.spec.reorder_rule, inverse=True)
        return [plain[i] for i in order]


@dataclass
class CorpusBundle:
    directory: Path
    n_train: int
    n_test: int
    seed: int
    spec: ToyLanguageSpec

    def path(self, key: str) -> Path:
        return self.directory / FILES[key]

    @property
    def train_l1(self) -> Path:
        return self.path("train_l1")

    @property
    def train_l2(self) -> Path:
        return self.path("train_l2")

    @property
    def test_l1(self) -> Path:
        return self.path("test_l1")

    @property
    def test_l2(self) -> Path:
        return self.path("test_l2")

    def test_pairs(self) -> Tuple[List[List[str]], List[List[str]]]:
        """Line-aligned (lang1, lang2) test sentences."""
        l1, l2 = read_corpus(self.test_l1), read_corpus(self.test_l2)
        if len(l1) != len(l2):
            raise CorpusFormatError(str(self.test_l2), None, f"{len(l2)} lines, expected {len(l1)}")
        return l1, l2

    def manifest_text(self) -> str:
        rows = {
            'n_train': self.n_train,
            'n_test': self.n_test,
            'seed': self.seed,
            **{f"file.{key}": name for key, name in FILES.items()},
            **{f"spec.{key}": value for key, value in self.spec.model_dump().items()},
        }
        return "".join(f"{key}={value}\n" for key, value in rows.items())


def _write_lines(path: Path, sentences: Sequence[Sequence[str]]):
    path.write_text("".join(" ".join(s) + "\n" for s in sentences), encoding="utf-8")


def generate_bundle(spec: ToyLanguageSpec, n_train: int, n_test: int, seed: int,
                    directory: Union[str, Path]) -> CorpusBundle:
    """Write disjoint monolingual training halves and a parallel test set."""
    if n_train <= 0 or n_test <= 0:
        raise ValueError(f"n_train and n_test must be positive, got {n_train} and {n_test}")
    rng = np.random.default_rng(seed)
    pair = ToyLanguagePair(spec, rng)

    needed = 2 * n_train + n_test
    if pair.capacity() < 2 * needed:
        raise VocabularyError(f"grammar yields {pair.capacity()} distinct sentences; "
                              f"{needed} are needed, so raise vocab_size or widen the length range")

    seen, pool = set(), []
    while len(pool) < 2 * n_train:
        sentence = pair.sample(rng)
        key = tuple(sentence)
        if key not in seen:
            seen.add(key)
            pool.append(sentence)

    train_l1 = pool[:n_train]
    train_l2 = [pair.translate(s) for s in pool[n_train:]]
    train_sides = {tuple(s) for s in train_l1} | {tuple(s) for s in train_l2}

    # test sentences whose either side occurs in training are redrawn
    test_l1, test_l2, resampled = [], [], 0
    for _ in range(MAX_DRAWS_PER_SENTENCE * needed):
        if len(test_l1) == n_test:
            break
        sentence = pair.sample(rng)
        key = tuple(sentence)
        if key in seen:
            continue
        seen.add(key)
        translated = pair.translate(sentence)
        if key in train_sides or tuple(translated) in train_sides:
            resampled += 1
            continue
        test_l1.append(sentence)
        test_l2.append(translated)
    if len(test_l1) < n_test:
        raise VocabularyError(f"found only {len(test_l1)} of {n_test} test sentences absent from training; "
                              f"raise vocab_size or widen the length range")
    if resampled:
        logger.info(f"Redrew {resampled} test sentences that also occur in training data")

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    bundle = CorpusBundle(directory=directory, n_train=n_train, n_test=n_test, seed=seed, spec=spec)
    _write_lines(bundle.train_l1, train_l1)
    _write_lines(bundle.train_l2, train_l2)
    _write_lines(bundle.test_l1, test_l1)
    _write_lines(bundle.test_l2, test_l2)
    (directory / MANIFEST).write_text(bundle.manifest_text(), encoding="utf-8")
    (directory / "cipher.tsv").write_text(
        "".join(f"{src}\t{dst}\n" for src, dst in sorted(pair.cipher.items())), encoding="utf-8")

    logger.info(f"Generated bundle in {directory}: {n_train} sentences per language, {n_test} test pairs, "
                f"{len(pair.category_of)} word types, {len(pair.anchors)} anchors, rule={spec.reorder_rule}")
    return bundle


def load_bundle(directory: Union[str, Path]) -> CorpusBundle:
    directory = Path(directory)
    manifest = directory / MANIFEST
    if not manifest.is_file():
        raise CorpusFormatError(str(manifest), None, "bundle manifest not found")

    values: Dict[str, str] = {}
    for line_number, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise CorpusFormatError(str(manifest), line_number, "expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()

    try:
        spec = ToyLanguageSpec(**{k[len("spec."):]: v for k, v in values.items() if k.startswith("spec.")})
        bundle = CorpusBundle(directory=directory, n_train=int(values["n_train"]), n_test=int(values["n_test"]),
                              seed=int(values["seed"]), spec=spec)
    except (KeyError, ValueError) as exc:
        raise CorpusFormatError(str(manifest), None, f"incomplete manifest ({exc})") from exc

    for key in FILES:
        if not bundle.path(key).is_file():
            raise CorpusFormatError(str(bundle.path(key)), None, "listed in the manifest but missing")
    return bundle
