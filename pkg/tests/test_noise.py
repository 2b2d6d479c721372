from collections import Counter

import numpy as np
import pytest

from src.models import Batch, NoiseSpec, Vocabulary
from src.noise import (apply_test_noise, corrupt, corrupt_batch, noisify_corpus, order_noise, read_corpus,
                       word_noise, word_noise_events)
from src.utils.errors import CorpusFormatError, NoiseSpecError


class FixedUniform:
    """Stands in for a Generator whose uniform draws are known in advance."""

    def __init__(self, draws):
        self.draws = np.asarray(draws, dtype=np.float64)

    def uniform(self, low, high, size):
        assert (low, size) == (0.0, len(self.draws))
        return self.draws


def binomial_bounds(n: int, p: float, z: float = 2.576):
    spread = z * np.sqrt(n * p * (1 - p))
    return n * p - spread, n * p + spread


def test_word_noise_with_zero_probability_is_identity(rng):
    sentence = list(range(30))
    assert word_noise(sentence, 0.0, rng, candidates=[99]) == sentence


def test_word_noise_with_single_candidate_vocabulary_is_identity(rng):
    sentence = ["x"] * 50
    assert word_noise(sentence, 0.7, rng, candidates=["x"]) == sentence


@pytest.mark.parametrize("a", [0.05, 0.1, 0.25])
def test_word_noise_rate_is_binomial(a):
    _, events = word_noise_events(list(range(10_000)), a, np.random.default_rng(11), candidates=list(range(50)))
    low, high = binomial_bounds(10_000, a)
    assert low <= events.sum() <= high


def test_word_noise_replacements_come_from_candidates(rng):
    out, events = word_noise_events(["a"] * 200, 0.5, rng, candidates=["b", "c"])
    assert {tok for tok, hit in zip(out, events) if hit} <= {"b", "c"}
    assert all(tok == "a" for tok, hit in zip(out, events) if not hit)


@pytest.mark.parametrize("a", [-0.1, 1.5, float("nan")])
def test_word_noise_rejects_bad_probability(rng, a):
    with pytest.raises(NoiseSpecError):
        word_noise([1, 2], a, rng, candidates=[3])


def test_order_noise_sorts_shifted_positions():
    out, permutation = order_noise(["t1", "t2", "t3", "t4"], 3.0, FixedUniform([2.5, 0.1, 2.2, 0.7]))
    assert out == ["t2", "t1", "t4", "t3"]
    assert permutation.gamma.tolist() == [1, 0, 3, 2]
    assert np.allclose(permutation.q, [2.5, 1.1, 4.2, 3.7])
    assert permutation.max_displacement() <= 3


@pytest.mark.parametrize("b", [0.0, 0.5, 1.0])
def test_order_noise_at_most_one_is_identity(b):
    rng = np.random.default_rng(2)
    for n in range(0, 40):
        sentence = list(range(n))
        out, permutation = order_noise(sentence, b, rng)
        assert out == sentence
        assert permutation.is_identity()


def test_order_noise_displacement_is_bounded():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        n = int(rng.integers(0, 51))
        b = float(rng.choice([0, 1, 2, 3, 5, 8, 10]))
        sentence = rng.integers(0, 20, size=n).tolist()
        out, permutation = order_noise(sentence, b, rng)
        assert permutation.max_displacement() <= b
        assert Counter(out) == Counter(sentence)
        assert [sentence[i] for i in np.argsort(permutation.gamma)] == out


def test_mean_displacement_grows_with_magnitude():
    sentences = [list(range(int(n))) for n in np.random.default_rng(5).integers(3, 12, size=1000)]
    means = []
    for b in (0.0, 2.0, 3.0, 5.0, 8.0, 10.0):
        rng = np.random.default_rng(6)
        means.append(np.mean(np.concatenate([order_noise(s, b, rng)[1].displacement for s in sentences])))
    assert means[0] == 0.0
    assert all(later >= earlier for earlier, later in zip(means, means[1:]))


def test_order_noise_rejects_negative_magnitude(rng):
    with pytest.raises(NoiseSpecError):
        order_noise([1, 2, 3], -1.0, rng)


def test_corrupt_without_drop_or_swap_is_identity(rng):
    spec = NoiseSpec(drop_prob=0.0, swap_window=1.0)
    sentence = list(range(25))
    assert corrupt(sentence, spec, rng) == sentence


def test_corrupt_keeps_single_token(rng):
    spec = NoiseSpec(drop_prob=0.9, swap_window=3.0)
    for _ in range(50):
        assert corrupt([7], spec, rng) == [7]


def test_corrupt_never_empties_a_sentence(rng):
    spec = NoiseSpec(drop_prob=0.95, swap_window=3.0)
    for _ in range(200):
        assert len(corrupt([1, 2, 3], spec, rng)) >= 1


def test_corrupt_survivor_count_is_binomial():
    spec = NoiseSpec(drop_prob=0.1, swap_window=3.0)
    out = corrupt(list(range(10_000)), spec, np.random.default_rng(4))
    low, high = binomial_bounds(10_000, 0.9)
    assert low <= len(out) <= high
    assert len(set(out)) == len(out)


def test_corrupt_rejects_empty_sentence(rng):
    with pytest.raises(NoiseSpecError):
        corrupt([], NoiseSpec(), rng)


def test_corrupt_batch_keeps_tag_and_eos(rng, batch):
    noisy = corrupt_batch(batch, NoiseSpec(drop_prob=0.3, swap_window=3.0), rng)
    assert noisy.language == "lang1"
    assert noisy.n_rows == batch.n_rows
    for row in range(noisy.n_rows):
        length = noisy.lengths[row]
        assert noisy.ids[row, 0] == Vocabulary.lang1_id
        assert noisy.ids[row, length - 1] == Vocabulary.eos_id
        assert set(noisy.content(row)) <= set(batch.content(row))
        assert len(noisy.content(row)) >= 1


def test_corrupt_batch_is_reproducible(batch):
    spec = NoiseSpec(drop_prob=0.2, swap_window=3.0)
    first = corrupt_batch(batch, spec, np.random.default_rng(9))
    second = corrupt_batch(batch, spec, np.random.default_rng(9))
    assert np.array_equal(first.ids, second.ids)


def test_apply_test_noise_combines_both_noises(rng):
    sentence = list(range(40))
    out, events, permutation = apply_test_noise(sentence, 0.2, 3.0, rng, candidates=[100, 101])
    assert len(out) == len(sentence)
    assert permutation.max_displacement() <= 3
    assert sum(tok >= 100 for tok in out) <= events.sum()


def _write_corpus(path, n_lines, rng, width=10):
    lines = [" ".join(f"w{i}" for i in rng.integers(0, 50, size=width)) for _ in range(n_lines)]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return lines


def test_noisify_without_noise_copies_every_line(tmp_path, rng):
    source = tmp_path / "corpus.txt"
    lines = _write_corpus(source, 30, rng)
    summary = noisify_corpus(source, NoiseSpec(a=0.0, b=0.0, seed=1), tmp_path / "out" / "noised.txt")
    assert (tmp_path / "out" / "noised.txt").read_text(encoding="utf-8").splitlines() == lines
    assert summary.replaced == 0
    assert summary.max_displacement == 0
    assert summary.lines == 30


def test_noisify_replacement_rate(tmp_path, rng):
    source = tmp_path / "corpus.txt"
    _write_corpus(source, 1000, rng)
    summary = noisify_corpus(source, NoiseSpec(a=0.1, b=3.0, seed=1), tmp_path / "noised.txt")
    low, high = binomial_bounds(summary.tokens, 0.1)
    assert summary.tokens == 10_000
    assert low <= summary.replaced <= high
    assert summary.max_displacement <= 3
    assert "replacement_rate=" in summary.to_text()


def test_noisify_is_line_aligned_and_reproducible(tmp_path, rng):
    source = tmp_path / "corpus.txt"
    _write_corpus(source, 20, rng)
    spec = NoiseSpec(a=0.2, b=2.0, seed=8)
    noisify_corpus(source, spec, tmp_path / "first.txt")
    noisify_corpus(source, spec, tmp_path / "second.txt")
    first = (tmp_path / "first.txt").read_bytes()
    assert first == (tmp_path / "second.txt").read_bytes()
    assert len(read_corpus(tmp_path / "first.txt")) == 20


def test_noisify_empty_corpus(tmp_path):
    source = tmp_path / "empty.txt"
    source.write_text("", encoding="utf-8")
    summary = noisify_corpus(source, NoiseSpec(a=0.1, seed=1), tmp_path / "noised.txt")
    assert (tmp_path / "noised.txt").read_text(encoding="utf-8") == ""
    assert (summary.lines, summary.tokens, summary.replaced) == (0, 0, 0)
    assert summary.replacement_rate == 0.0


def test_read_corpus_rejects_blank_and_binary_lines(tmp_path):
    blank = tmp_path / "blank.txt"
    blank.write_text("a b\n\nc\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError) as info:
        read_corpus(blank)
    assert info.value.line_number == 2

    binary = tmp_path / "binary.txt"
    binary.write_bytes(b"ok line\n\xff\xfe\n")
    with pytest.raises(CorpusFormatError) as info:
        read_corpus(binary)
    assert info.value.line_number == 2

    with pytest.raises(CorpusFormatError):
        read_corpus(tmp_path / "missing.txt")
