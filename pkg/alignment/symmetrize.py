"""Grow-diag-final-and symmetrization of two directed alignments.

Both inputs are sets of (source index, target index) links over the same
sentence pair. The scan order is row-major over (source, target) and the grow
step repeats until no link is added, so the result depends only on the inputs.
"""

import logging
from typing import FrozenSet, Iterable, List
from alignment.soft import CandidateAlignment
from corpus.alignments import Link, parse_alignment_line, invert_links

_log = logging.getLogger(__name__)

NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


class _Coverage(object):

    def __init__(self, src_len: int, tgt_len: int, links: Iterable[Link]):
        self.links = set()
        self.source = [0] * src_len
        self.target = [0] * tgt_len
        for link in links:
            self.add(link)

    def add(self, link: Link):
        s, t = link
        self.links.add(link)
        self.source[s] += 1
        self.target[t] += 1


def symmetrize_gdfa(forward: Iterable[Link], backward: Iterable[Link], src_len: int, tgt_len: int) -> CandidateAlignment:
    """Grow the intersection toward the union; links outside the sentence pair raise ``ContractError``."""
    forward = CandidateAlignment.create(getattr(forward, 'links', forward), src_len, tgt_len).links
    backward = CandidateAlignment.create(getattr(backward, 'links', backward), src_len, tgt_len).links
    union = forward | backward
    current = _Coverage(src_len, tgt_len, forward & backward)
    added = True
    while added:
        added = False
        for s in range(src_len):
            for t in range(tgt_len):
                if (s, t) not in current.links:
                    continue
                for ds, dt in NEIGHBORS:
                    candidate = (s + ds, t + dt)
                    if candidate in union and candidate not in current.links:
                        if not current.source[candidate[0]] or not current.target[candidate[1]]:
                            current.add(candidate)
                            added = True
    for directed in (forward, backward):
        for s in range(src_len):
            for t in range(tgt_len):
                if (s, t) in directed and not current.source[s] and not current.target[t]:
                    current.add((s, t))
    return CandidateAlignment.create(current.links, src_len, tgt_len)


def load_directed(pathname: str, target_to_source: bool=False) -> List[FrozenSet[Link]]:
    """Read a plain Pharaoh file; ``target_to_source`` swaps each link so that source comes first."""
    alignments = []
    with open(pathname, 'r', encoding='utf-8') as ifile:
        for lineno, line in enumerate(ifile, 1):
            links = parse_alignment_line(line, pathname, lineno).possible
            alignments.append(invert_links(links) if target_to_source else links)
    _log.debug("read %d directed alignments from %s", len(alignments), pathname)
    return alignments
