import logging
from typing import FrozenSet, Iterable, NamedTuple
import numpy as np
from common.errors import ContractError
from corpus.alignments import HardAlignmentSet, Link

_log = logging.getLogger(__name__)


class CandidateAlignment(NamedTuple):
    """Links proposed by a system, (source index, target index)."""

    links: FrozenSet[Link]
    src_len: int
    tgt_len: int

    @classmethod
    def create(cls, links: Iterable[Link], src_len: int, tgt_len: int):
        links = frozenset((int(s), int(t)) for s, t in links)
        for s, t in links:
            if not (0 <= s < src_len and 0 <= t < tgt_len):
                raise ContractError("link {}-{} outside a {}x{} sentence pair".format(s, t, src_len, tgt_len))
        return cls(links, src_len, tgt_len)

    def __contains__(self, link):
        return link in self.links

    def __iter__(self):
        return iter(sorted(self.links))


def to_soft(hard: HardAlignmentSet, src_len: int, tgt_len: int, include_possible: bool=True) -> np.ndarray:
    """Row-stochastic (tgt_len, src_len) matrix from hard links.

    A target word aligned to k sources puts 1/k on each of them; an unaligned
    target word spreads its row uniformly over the whole source sentence.
    """
    if src_len < 1 or tgt_len < 1:
        raise ContractError("sentence lengths must be positive, got {}x{}".format(src_len, tgt_len))
    hard.check_bounds(src_len, tgt_len)
    soft = np.zeros((tgt_len, src_len))
    for t in range(tgt_len):
        sources = hard.sources_of(t, include_possible)
        if sources:
            soft[t, sources] = 1.0 / len(sources)
        else:
            soft[t, :] = 1.0 / src_len
    return soft


def attention_to_hard(attention) -> CandidateAlignment:
    """One link per target row at the most attended source; ties go to the lowest source index."""
    attention = np.asarray(attention, dtype=np.float64)
    if attention.ndim != 2 or attention.shape[1] < 1:
        raise ContractError("attention must be a (target, source) matrix, got shape {}".format(attention.shape))
    best = np.argmax(attention, axis=1)
    return CandidateAlignment.create(((int(s), t) for t, s in enumerate(best)), attention.shape[1], attention.shape[0])
