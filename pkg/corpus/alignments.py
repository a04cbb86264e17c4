"""Gold word alignments in Pharaoh notation with sure/possible markers.

One line per sentence pair, whitespace-separated ``src-tgt`` links, 0-based.
A link may be followed by a separate ``S`` (sure) or ``P`` (possible) token;
an unmarked link is sure. Plain Pharaoh files, such as directed GIZA++
output, are therefore read as all-sure. Serialization writes every link with
an explicit marker, sorted by (source, target), single-space separated.
"""

import re
import logging
from typing import FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple
from common.errors import ConsistencyError, ContractError, ParseError

_log = logging.getLogger(__name__)
_LINK = re.compile(r'^(\d+)-(\d+)$')
SURE = 'S'
POSSIBLE = 'P'

Link = Tuple[int, int]


class HardAlignmentSet(NamedTuple):
    """Gold links of one sentence pair as (source index, target index).

    ``possible`` always contains ``sure`` (P includes S).
    """

    sure: FrozenSet[Link]
    possible: FrozenSet[Link]

    @classmethod
    def create(cls, sure: Iterable[Link]=(), possible: Iterable[Link]=()):
        sure = frozenset((int(s), int(t)) for s, t in sure)
        possible = frozenset((int(s), int(t)) for s, t in possible) | sure
        return cls(sure, possible)

    @property
    def possible_only(self) -> FrozenSet[Link]:
        return self.possible - self.sure

    def links(self, include_possible: bool=True) -> FrozenSet[Link]:
        return self.possible if include_possible else self.sure

    def sources_of(self, target_index: int, include_possible: bool=True) -> List[int]:
        return sorted(s for s, t in self.links(include_possible) if t == target_index)

    def check_bounds(self, src_len: int, tgt_len: int):
        for s, t in self.possible:
            if not (0 <= s < src_len and 0 <= t < tgt_len):
                raise ContractError("link {}-{} outside a {}x{} sentence pair".format(s, t, src_len, tgt_len))


def parse_alignment_line(line: str, pathname: str='<string>', lineno: int=1) -> HardAlignmentSet:
    sure, possible = [], []
    current = None  # type: Optional[Link]
    marked = False
    for token in line.split():
        m = _LINK.match(token)
        if m:
            if current is not None and not marked:
                sure.append(current)
            current = (int(m.group(1)), int(m.group(2)))
            marked = False
        elif token in (SURE, POSSIBLE):
            if current is None or marked:
                raise ParseError(pathname, lineno, "marker {!r} does not follow a link".format(token))
            (sure if token == SURE else possible).append(current)
            marked = True
        else:
            raise ParseError(pathname, lineno, "malformed alignment token {!r}".format(token))
    if current is not None and not marked:
        sure.append(current)
    return HardAlignmentSet.create(sure, possible)


def load_alignments(pathname: str, pairs: Sequence=None) -> List[HardAlignmentSet]:
    """Read one alignment set per line; with ``pairs`` given, validate indices against sentence lengths."""
    alignments = []
    with open(pathname, 'r', encoding='utf-8') as ifile:
        for lineno, line in enumerate(ifile, 1):
            alignment = parse_alignment_line(line, pathname, lineno)
            if pairs is not None and lineno <= len(pairs):
                pair = pairs[lineno - 1]
                for s, t in sorted(alignment.possible):
                    if s >= len(pair.source) or t >= len(pair.target):
                        raise ParseError(pathname, lineno, "link {}-{} out of range for {} source and {} target tokens".format(
                            s, t, len(pair.source), len(pair.target)))
            alignments.append(alignment)
    if pairs is not None and len(alignments) != len(pairs):
        raise ConsistencyError("{} holds {} alignment lines for {} sentence pairs".format(pathname, len(alignments), len(pairs)))
    nsure = sum(len(a.sure) for a in alignments)
    nposs = sum(len(a.possible_only) for a in alignments)
    _log.debug("loaded %d alignment lines (%d sure, %d possible-only links) from %s", len(alignments), nsure, nposs, pathname)
    return alignments


def format_alignment(alignment: HardAlignmentSet) -> str:
    parts = []
    for s, t in sorted(alignment.possible):
        parts.append("{}-{} {}".format(s, t, SURE if (s, t) in alignment.sure else POSSIBLE))
    return ' '.join(parts)


def format_links(links: Iterable[Link]) -> str:
    """Plain Pharaoh line without markers."""
    return ' '.join("{}-{}".format(s, t) for s, t in sorted(links))


def write_alignments(pathname: str, alignments: Iterable[HardAlignmentSet]):
    with open(pathname, 'w', encoding='utf-8') as ofile:
        for alignment in alignments:
            print(format_alignment(alignment), file=ofile)


def invert_links(links: Iterable[Link]) -> FrozenSet[Link]:
    """Swap the roles of source and target, e.g. for a target-to-source GIZA++ file."""
    return frozenset((t, s) for s, t in links)
