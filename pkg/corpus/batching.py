import logging
from typing import List, NamedTuple, Sequence, Tuple
import numpy as np
from corpus.parallel import SentencePair
from corpus.vocab import Vocabulary

_log = logging.getLogger(__name__)


class Batch(NamedTuple):
    """Padded index matrices; masks are true exactly on real tokens."""

    sentence_ids: Tuple[int, ...]
    source: np.ndarray
    source_mask: np.ndarray
    target: np.ndarray
    target_mask: np.ndarray

    @property
    def size(self) -> int:
        return len(self.sentence_ids)

    @property
    def source_lengths(self) -> np.ndarray:
        return self.source_mask.sum(axis=1)

    @property
    def target_lengths(self) -> np.ndarray:
        return self.target_mask.sum(axis=1)


def pad_sequences(sequences: Sequence[Sequence[int]], pad_id: int) -> Tuple[np.ndarray, np.ndarray]:
    width = max(len(s) for s in sequences)
    ids = np.full((len(sequences), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(sequences), width), dtype=bool)
    for row, seq in enumerate(sequences):
        ids[row, :len(seq)] = seq
        mask[row, :len(seq)] = True
    return ids, mask


def make_batch(pairs: Sequence[SentencePair], source_vocab: Vocabulary, target_vocab: Vocabulary) -> Batch:
    src, src_mask = pad_sequences([source_vocab.encode(p.source) for p in pairs], source_vocab.pad_id)
    tgt, tgt_mask = pad_sequences([target_vocab.encode(p.target) for p in pairs], target_vocab.pad_id)
    return Batch(tuple(p.sentence_id for p in pairs), src, src_mask, tgt, tgt_mask)


def make_batches(pairs: Sequence[SentencePair], batch_size: int, rng_seed, source_vocab: Vocabulary,
                 target_vocab: Vocabulary, shuffle: bool=True) -> List[Batch]:
    """Shuffle deterministically from ``rng_seed``, then cut into padded batches of ``batch_size``."""
    assert isinstance(batch_size, int) and batch_size > 0, "batch size must be a positive integer"
    pairs = list(pairs)
    if not pairs:
        return []
    order = np.random.default_rng(rng_seed).permutation(len(pairs)) if shuffle else np.arange(len(pairs))
    batches = []
    for start in range(0, len(order), batch_size):
        chunk = [pairs[k] for k in order[start:start + batch_size]]
        batches.append(make_batch(chunk, source_vocab, target_vocab))
    _log.debug("%d pairs in %d batches of at most %d", len(pairs), len(batches), batch_size)
    return batches
