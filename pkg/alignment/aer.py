"""Alignment error rate against gold sure (S) and possible (P) links, P including S."""

import logging
from typing import Iterable, NamedTuple, Optional, Sequence
from common.errors import ConsistencyError, UndefinedInputError
from corpus.alignments import HardAlignmentSet, Link

_log = logging.getLogger(__name__)


def _links(candidate) -> frozenset:
    return frozenset(getattr(candidate, 'links', candidate))


class AerCounts(NamedTuple):

    candidate: int = 0  # |A|
    sure: int = 0  # |S|
    sure_hits: int = 0  # |A & S|
    possible_hits: int = 0  # |A & P|

    @classmethod
    def of(cls, candidate: Iterable[Link], gold: HardAlignmentSet):
        links = _links(candidate)
        return cls(len(links), len(gold.sure), len(links & gold.sure), len(links & gold.possible))

    def __add__(self, other):
        return AerCounts(*(a + b for a, b in zip(self, other)))

    @property
    def aer(self) -> float:
        if self.candidate + self.sure == 0:
            raise UndefinedInputError("AER is undefined when both the candidate and the sure links are empty")
        return 1.0 - (self.sure_hits + self.possible_hits) / (self.candidate + self.sure)

    @property
    def precision(self) -> Optional[float]:
        return self.possible_hits / self.candidate if self.candidate else None

    @property
    def recall(self) -> Optional[float]:
        return self.sure_hits / self.sure if self.sure else None

    def to_dict(self) -> dict:
        return {
            'aer': self.aer if self.candidate + self.sure else None,
            'precision': self.precision,
            'recall': self.recall,
            'candidate_links': self.candidate,
            'sure_links': self.sure,
            'sure_hits': self.sure_hits,
            'possible_hits': self.possible_hits,
        }


def aer(candidate: Iterable[Link], gold: HardAlignmentSet) -> float:
    """``1 - (|A&S| + |A&P|) / (|A| + |S|)`` for one sentence pair."""
    return AerCounts.of(candidate, gold).aer


def corpus_counts(candidates: Sequence, golds: Sequence[HardAlignmentSet]) -> AerCounts:
    """Counts summed over sentence pairs; the corpus AER is computed from the sums."""
    if len(candidates) != len(golds):
        raise ConsistencyError("{} candidate alignments for {} gold alignments".format(len(candidates), len(golds)))
    total = AerCounts()
    for candidate, gold in zip(candidates, golds):
        total = total + AerCounts.of(candidate, gold)
    _log.debug("corpus alignment counts %s", total)
    return total


def corpus_aer(candidates: Sequence, golds: Sequence[HardAlignmentSet]) -> float:
    return corpus_counts(candidates, golds).aer
