"""Token-level annotations: POS tags, dependency roles and heads.

One row per token, ``token TAB pos TAB role TAB head``, a blank line after
each sentence. Role and head may be omitted or written as ``_`` (target-side
files usually carry only POS tags). Unknown POS tags are kept verbatim and
reported through the ``flagged`` list.
"""

import re
import logging
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple
from common.errors import ConsistencyError, ParseError
try:
    import unidecode
    unicode_normalize = unidecode.unidecode
except ModuleNotFoundError:
    import unicodedata
    unicode_normalize = lambda input_str: unicodedata.normalize('NFKD', input_str).encode('ASCII', 'ignore').decode('ASCII')

_log = logging.getLogger(__name__)

UNIVERSAL_TAGS = frozenset(['ADJ', 'ADP', 'ADV', 'CONJ', 'DET', 'NOUN', 'NUM', 'PRT', 'PRON', 'PUNC', 'VERB', 'X'])
_BLANK = '_'


class TokenAnnotation(NamedTuple):

    sentence_id: int
    tokens: Tuple[str, ...]
    pos: Tuple[str, ...]
    roles: Tuple[str, ...]
    heads: Tuple[Optional[int], ...]

    @property
    def length(self) -> int:
        return len(self.tokens)


class Flag(NamedTuple):

    sentence_id: int
    position: int
    kind: str
    value: str


def canonical_token(token: str) -> str:
    """Case- and diacritic-folded form used to compare annotation tokens with corpus tokens."""
    if any(ord(ch) > 127 for ch in token):
        token = unicode_normalize(token)
    return re.sub(r'\s+', '', token).lower()


def _parse_row(line: str, pathname: str, lineno: int):
    fields = line.split('\t')
    if len(fields) < 2 or len(fields) > 4 or not fields[0]:
        raise ParseError(pathname, lineno, "expected 2 to 4 tab-separated fields, got {}".format(len(fields)))
    token, pos = fields[0], fields[1]
    role = fields[2] if len(fields) > 2 and fields[2] else _BLANK
    head = None
    if len(fields) > 3 and fields[3] not in ('', _BLANK):
        try:
            head = int(fields[3])
        except ValueError:
            raise ParseError(pathname, lineno, "head must be an integer or '_', got {!r}".format(fields[3]))
    return token, pos, role, head


def read_annotation_blocks(pathname: str) -> List[List[tuple]]:
    blocks, current = [], []
    with open(pathname, 'r', encoding='utf-8') as ifile:
        for lineno, line in enumerate(ifile, 1):
            line = line.rstrip('\n').rstrip('\r')
            if not line.strip():
                if current:
                    blocks.append(current)
                    current = []
                continue
            current.append(_parse_row(line, pathname, lineno))
    if current:
        blocks.append(current)
    return blocks


def load_annotations(pathname: str, sentences: Sequence[Tuple[int, Sequence[str]]]=None,
                     tagset: Iterable[str]=UNIVERSAL_TAGS, flagged: list=None) -> List[TokenAnnotation]:
    """Read annotation blocks and align them one-to-one with ``sentences`` (id, tokens) when given.

    Without ``sentences`` the blocks get 1-based ids in file order.
    """
    tagset = frozenset(tagset) if tagset is not None else None
    blocks = read_annotation_blocks(pathname)
    if sentences is not None and len(blocks) != len(sentences):
        raise ConsistencyError("{} holds {} annotated sentences, corpus has {}".format(pathname, len(blocks), len(sentences)))
    annotations = []
    nflagged = 0
    for k, rows in enumerate(blocks):
        sentence_id = sentences[k][0] if sentences is not None else k + 1
        tokens, pos, roles, heads = (tuple(col) for col in zip(*rows))
        if sentences is not None:
            expected = sentences[k][1]
            if len(expected) != len(tokens):
                raise ConsistencyError("sentence {} has {} tokens but {} annotation rows".format(
                    sentence_id, len(expected), len(tokens)), [sentence_id])
            for position, (a, b) in enumerate(zip(tokens, expected)):
                if canonical_token(a) != canonical_token(b):
                    nflagged += 1
                    if flagged is not None:
                        flagged.append(Flag(sentence_id, position, 'token', a))
        if tagset is not None:
            for position, tag in enumerate(pos):
                if tag not in tagset:
                    nflagged += 1
                    if flagged is not None:
                        flagged.append(Flag(sentence_id, position, 'pos', tag))
        annotations.append(TokenAnnotation(sentence_id, tokens, pos, roles, heads))
    if nflagged:
        _log.warning("%d annotation entries in %s flagged (unknown tag or token mismatch)", nflagged, pathname)
    return annotations


def write_annotations(pathname: str, annotations: Iterable[TokenAnnotation]):
    with open(pathname, 'w', encoding='utf-8') as ofile:
        for annotation in annotations:
            for token, pos, role, head in zip(annotation.tokens, annotation.pos, annotation.roles, annotation.heads):
                print('\t'.join([token, pos, role, _BLANK if head is None else str(head)]), file=ofile)
            print(file=ofile)
