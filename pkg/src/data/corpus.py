import queue
import threading
from collections import Counter
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Union

import numpy as np

from ..models import Batch, Sentence, Vocabulary
from ..noise.corpus import read_corpus
from ..utils.errors import VocabularyError
from ..utils.logger import get_logger

logger = get_logger("data.corpus")

PathLike = Union[str, Path]


def build_vocab(paths: Sequence[PathLike]) -> Vocabulary:
    """Union vocabulary of every corpus, most frequent tokens first."""
    counts: Counter = Counter()
    for path in paths:
        for sentence in read_corpus(path):
            counts.update(sentence)
    if not counts:
        raise VocabularyError(f"no tokens in {', '.join(str(p) for p in paths)}")
    vocab = Vocabulary.from_counts(counts)
    logger.info(f"Built vocabulary of {len(vocab)} ids ({len(counts)} token types) from {len(paths)} corpora")
    return vocab


def encode_corpus(path: PathLike, vocab: Vocabulary) -> "EncodedCorpus":
    sentences, unknown, total = [], 0, 0
    for tokens in read_corpus(path):
        ids, n_unk = vocab.encode(tokens)
        sentences.append(ids)
        unknown += n_unk
        total += len(tokens)
    return EncodedCorpus(path=Path(path), sentences=sentences, unk_tokens=unknown, total_tokens=total)


class EncodedCorpus:
    def __init__(self, path: Path, sentences: List[Sentence], unk_tokens: int, total_tokens: int):
        self.path = path
        self.sentences = sentences
        self.unk_tokens = unk_tokens
        self.total_tokens = total_tokens

    @property
    def unk_rate(self) -> float:
        return self.unk_tokens / self.total_tokens if self.total_tokens else 0.0


_END = object()


class BatchStream:
    """Shuffled, padded monolingual batches.

    Epoch e visits every line once in the order drawn from (seed, e); batches
    are consecutive slices of that order, the last one possibly short.
    `start` skips batches already consumed by an earlier run. With
    `prefetch > 0` a producer thread fills a bounded queue; batches still come
    out in production order.
    """

    def __init__(self, corpus: Union[PathLike, EncodedCorpus], vocab: Vocabulary, batch_size: int,
                 max_len: int, language: str, seed: int, start: int = 0, epochs: Optional[int] = None,
                 prefetch: int = 0):
        if batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {batch_size}")
        if max_len < 3:
            raise ValueError(f"max_len must leave room for one token, got {max_len}")
        self.corpus = corpus if isinstance(corpus, EncodedCorpus) else encode_corpus(corpus, vocab)
        if not self.corpus.sentences:
            raise VocabularyError(f"{self.corpus.path}: corpus is empty")
        self.vocab = vocab
        self.batch_size = batch_size
        self.max_len = max_len
        self.language = language
        self.seed = seed
        self.start = start
        self.epochs = epochs
        self.prefetch = prefetch
        self.consumed = start
        self.truncated = 0

        long_lines = sum(len(s) > max_len - 2 for s in self.corpus.sentences)
        logger.info(f"{self.corpus.path} ({language}): {len(self.corpus.sentences)} sentences, "
                    f"{self.corpus.unk_tokens}/{self.corpus.total_tokens} unk tokens "
                    f"(rate {self.corpus.unk_rate:.4f}), {long_lines} longer than {max_len - 2} tokens")

    @property
    def batches_per_epoch(self) -> int:
        return -(-len(self.corpus.sentences) // self.batch_size)

    @property
    def unk_tokens(self) -> int:
        return self.corpus.unk_tokens

    def epoch_order(self, epoch: int) -> np.ndarray:
        return np.random.default_rng([self.seed, epoch]).permutation(len(self.corpus.sentences))

    def _produce(self) -> Iterator[Batch]:
        epoch, offset = divmod(self.start, self.batches_per_epoch)
        while self.epochs is None or epoch < self.epochs:
            order = self.epoch_order(epoch)
            for index in range(offset, self.batches_per_epoch):
                rows = order[index * self.batch_size:(index + 1) * self.batch_size]
                yield Batch.from_sentences([self.corpus.sentences[i] for i in rows], self.vocab,
                                           self.language, self.max_len)
            epoch, offset = epoch + 1, 0

    def _prefetched(self) -> Iterator[Batch]:
        handoff: "queue.Queue" = queue.Queue(maxsize=self.prefetch)
        stop = threading.Event()

        def producer():
            try:
                for batch in self._produce():
                    while not stop.is_set():
                        try:
                            handoff.put(batch, timeout=0.1)
                            break
                        except queue.Full:
                            continue
                    if stop.is_set():
                        return
            except BaseException as exc:  # surfaced on the consumer side
                handoff.put(exc)
                return
            handoff.put(_END)

        thread = threading.Thread(target=producer, name=f"batch-stream-{self.language}", daemon=True)
        thread.start()
        try:
            while True:
                item = handoff.get()
                if item is _END:
                    return
                if isinstance(item, BaseException):
                    raise item
                yield item
        finally:
            stop.set()

    def __iter__(self) -> Iterator[Batch]:
        source = self._prefetched() if self.prefetch > 0 else self._produce()
        for batch in source:
            self.consumed += 1
            self.truncated += batch.truncated
            if batch.truncated:
                logger.debug(f"{self.language} batch {self.consumed}: {batch.truncated} sentences truncated")
            yield batch


def batch_stream(corpus_path: PathLike, vocab: Vocabulary, batch_size: int, max_len: int, language: str,
                 seed: int, **options) -> Iterator[Batch]:
    return iter(BatchStream(corpus_path, vocab, batch_size, max_len, language, seed, **options))
