from itertools import islice

import numpy as np
import pytest

from src.data import (REORDER_RULES, BatchStream, ToyLanguagePair, ToyLanguageSpec, batch_stream, build_vocab,
                      encode_corpus, generate_bundle, load_bundle, reorder)
from src.models import Vocabulary
from src.noise import read_corpus
from src.utils.errors import CorpusFormatError, VocabularyError


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


@pytest.mark.parametrize("rule", REORDER_RULES)
def test_reorder_moves_tokens_at_most_two_places(rule):
    rng = np.random.default_rng(0)
    pair = ToyLanguagePair(ToyLanguageSpec(reorder_rule=rule), rng)
    for _ in range(500):
        sentence = pair.sample(rng)
        order = reorder([pair.category_of[w] for w in sentence], rule)
        assert sorted(order) == list(range(len(sentence)))
        assert max(abs(src - dst) for dst, src in enumerate(order)) <= 2


def test_adjective_noun_rule_swaps_the_pair():
    assert reorder(["det", "adj", "noun", "verb"], "adjective_noun") == [0, 2, 1, 3]
    assert reorder(["det", "noun", "adj", "verb"], "adjective_noun", inverse=True) == [0, 2, 1, 3]


@pytest.mark.parametrize("rule", REORDER_RULES)
def test_cipher_round_trip_is_identity(rule):
    rng = np.random.default_rng(1)
    pair = ToyLanguagePair(ToyLanguageSpec(reorder_rule=rule), rng)
    for _ in range(500):
        sentence = pair.sample(rng)
        assert pair.inverse(pair.translate(sentence)) == sentence


def test_cipher_is_a_bijection_with_anchors_fixed():
    pair = ToyLanguagePair(ToyLanguageSpec(anchor_fraction=0.3), np.random.default_rng(2))
    assert len(set(pair.cipher.values())) == len(pair.cipher)
    assert all(pair.cipher[w] == w for w in pair.anchors)
    assert len(pair.anchors) == round(0.3 * len(pair.cipher))


def test_all_anchor_identity_pair_gives_equal_languages(tmp_path):
    spec = ToyLanguageSpec(vocab_size=60, anchor_fraction=1.0, reorder_rule="identity")
    bundle = generate_bundle(spec, n_train=50, n_test=30, seed=3, directory=tmp_path)
    l1, l2 = bundle.test_pairs()
    assert l1 == l2


def test_default_bundle_line_counts(tmp_path):
    bundle = generate_bundle(ToyLanguageSpec(), n_train=20_000, n_test=500, seed=4, directory=tmp_path)
    assert len(read_corpus(bundle.train_l1)) == 20_000
    assert len(read_corpus(bundle.train_l2)) == 20_000
    assert len(read_corpus(bundle.test_l1)) == 500
    assert len(read_corpus(bundle.test_l2)) == 500


def test_bundle_keeps_test_sentences_out_of_training(toy_bundle):
    train = {tuple(s) for s in read_corpus(toy_bundle.train_l1) + read_corpus(toy_bundle.train_l2)}
    l1, l2 = toy_bundle.test_pairs()
    assert not any(tuple(s) in train for s in l1 + l2)
    assert all(3 <= len(s) <= 6 for s in l1)


def test_test_sentences_colliding_with_training_are_redrawn(tmp_path, monkeypatch):
    def one_determiner(self, sentence):
        return [self.lexicon["det"][0] if self.category_of[w] == "det" else w for w in sentence]

    monkeypatch.setattr(ToyLanguagePair, "translate", one_determiner)
    spec = ToyLanguageSpec(vocab_size=50, min_len=3, max_len=3, reorder_rule="identity")
    bundle = generate_bundle(spec, n_train=50, n_test=20, seed=6, directory=tmp_path)

    train = {tuple(s) for s in read_corpus(bundle.train_l1) + read_corpus(bundle.train_l2)}
    l1, l2 = bundle.test_pairs()
    assert len(l1) == len(set(map(tuple, l1))) == 20
    assert not any(tuple(s) in train for s in l1 + l2)


def test_bundle_generation_is_reproducible(tmp_path):
    spec = ToyLanguageSpec(vocab_size=40, max_len=6)
    first = generate_bundle(spec, n_train=40, n_test=10, seed=9, directory=tmp_path / "a")
    second = generate_bundle(spec, n_train=40, n_test=10, seed=9, directory=tmp_path / "b")
    for name in ("train_l1", "train_l2", "test_l1", "test_l2"):
        assert first.path(name).read_bytes() == second.path(name).read_bytes()


def test_grammar_too_small_is_rejected(tmp_path):
    spec = ToyLanguageSpec(vocab_size=6, min_len=3, max_len=3)
    with pytest.raises(VocabularyError):
        generate_bundle(spec, n_train=10, n_test=5, seed=0, directory=tmp_path)


def test_invalid_toy_spec_is_rejected():
    with pytest.raises(ValueError):
        ToyLanguageSpec(min_len=8, max_len=4)
    with pytest.raises(ValueError):
        ToyLanguageSpec(reorder_rule="reverse")


def test_load_bundle_round_trip(toy_bundle, tmp_path):
    loaded = load_bundle(toy_bundle.directory)
    assert loaded.spec == toy_bundle.spec
    assert (loaded.n_train, loaded.n_test, loaded.seed) == (60, 20, 5)
    assert loaded.test_pairs() == toy_bundle.test_pairs()
    with pytest.raises(CorpusFormatError):
        load_bundle(tmp_path / "nowhere")


def test_vocab_of_disjoint_corpora_is_the_union(tmp_path):
    first = write_lines(tmp_path / "a.txt", ["a b c", "d e a"])
    second = write_lines(tmp_path / "b.txt", ["F G H I", "J K L"])
    vocab = build_vocab([first, second])
    assert len(vocab) == 12 + Vocabulary.n_special
    assert vocab.token(Vocabulary.n_special) == "a"


def test_vocab_of_identical_corpora_matches_single(tmp_path):
    corpus = write_lines(tmp_path / "a.txt", ["x y z", "z y", "q"])
    assert build_vocab([corpus, corpus]) == build_vocab([corpus])


def test_vocab_save_load_preserves_ids(tmp_path):
    vocab = build_vocab([write_lines(tmp_path / "a.txt", ["x y z", "z y", "q"])])
    vocab.save(tmp_path / "vocab.txt")
    loaded = Vocabulary.load(tmp_path / "vocab.txt")
    assert loaded == vocab
    assert all(loaded.token_id(tok) == vocab.token_id(tok) for tok in vocab.tokens)


def test_vocab_rejects_reserved_and_empty_corpora(tmp_path):
    with pytest.raises(VocabularyError):
        Vocabulary(["<pad>"])
    with pytest.raises(VocabularyError):
        build_vocab([write_lines(tmp_path / "empty.txt", [])])


def test_batch_size_one_yields_single_sentences(tmp_path):
    corpus = write_lines(tmp_path / "a.txt", ["a b c", "d", "e f"])
    vocab = build_vocab([corpus])
    stream = BatchStream(corpus, vocab, batch_size=1, max_len=10, language="lang1", seed=0, epochs=1)
    batches = list(stream)
    assert len(batches) == 3
    assert sorted(int(b.lengths[0]) for b in batches) == [3, 4, 5]
    assert all(b.n_rows == 1 and b.width == b.lengths[0] for b in batches)


def test_epoch_covers_every_line_once(tmp_path):
    lines = [f"t{i} t{i + 1}" for i in range(23)]
    corpus = write_lines(tmp_path / "a.txt", lines)
    vocab = build_vocab([corpus])
    stream = BatchStream(corpus, vocab, batch_size=5, max_len=10, language="lang2", seed=3, epochs=1)
    seen = [" ".join(vocab.decode(s)) for batch in stream for s in batch.sentences()]
    assert sorted(seen) == sorted(lines)
    assert stream.consumed == stream.batches_per_epoch == 5


def test_unk_rate_matches_direct_count(tmp_path):
    vocab = build_vocab([write_lines(tmp_path / "known.txt", ["a b c"])])
    corpus = write_lines(tmp_path / "mixed.txt", ["a x b", "y z", "c"])
    encoded = encode_corpus(corpus, vocab)
    assert encoded.unk_tokens == 3
    assert encoded.unk_rate == pytest.approx(3 / 6)


def test_start_offset_skips_consumed_batches(tmp_path):
    corpus = write_lines(tmp_path / "a.txt", [f"t{i}" for i in range(17)])
    vocab = build_vocab([corpus])
    full = [b.ids for b in islice(BatchStream(corpus, vocab, 4, 8, "lang1", seed=1), 12)]
    resumed = [b.ids for b in islice(BatchStream(corpus, vocab, 4, 8, "lang1", seed=1, start=7), 5)]
    assert all(np.array_equal(a, b) for a, b in zip(full[7:], resumed))


def test_prefetch_preserves_order(tmp_path):
    corpus = write_lines(tmp_path / "a.txt", [f"t{i} u{i}" for i in range(30)])
    vocab = build_vocab([corpus])
    plain = [b.ids for b in BatchStream(corpus, vocab, 4, 8, "lang1", seed=2, epochs=2)]
    prefetched = [b.ids for b in BatchStream(corpus, vocab, 4, 8, "lang1", seed=2, epochs=2, prefetch=3)]
    assert len(plain) == len(prefetched) == 16
    assert all(np.array_equal(a, b) for a, b in zip(plain, prefetched))


def test_long_sentences_are_truncated_and_counted(tmp_path):
    corpus = write_lines(tmp_path / "a.txt", ["a b c d e f g", "a b"])
    vocab = build_vocab([corpus])
    stream = BatchStream(corpus, vocab, 2, 5, "lang1", seed=0, epochs=1)
    (batch,) = list(stream)
    assert batch.width == 5
    assert stream.truncated == 1


def test_batch_stream_function_iterates(tmp_path):
    corpus = write_lines(tmp_path / "a.txt", ["a b", "c"])
    vocab = build_vocab([corpus])
    batches = list(batch_stream(corpus, vocab, 2, 6, "lang1", seed=0, epochs=3))
    assert len(batches) == 3
