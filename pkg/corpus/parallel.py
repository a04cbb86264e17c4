"""Parallel corpora: two aligned, pre-tokenized UTF-8 text files."""

import logging
from typing import Iterable, List, NamedTuple, Tuple
from common.errors import ConsistencyError, ContractError, ParseError

_log = logging.getLogger(__name__)
DEFAULT_MAX_LENGTH = 100


class SentencePair(NamedTuple):

    sentence_id: int
    source: Tuple[str, ...]
    target: Tuple[str, ...]

    @classmethod
    def create(cls, sentence_id: int, source: Iterable[str], target: Iterable[str]):
        source, target = tuple(source), tuple(target)
        if not source or not target:
            raise ContractError("sentence {} has an empty side".format(sentence_id))
        return cls(sentence_id, source, target)


def read_sentences(pathname: str) -> List[Tuple[str, ...]]:
    with open(pathname, 'r', encoding='utf-8') as ifile:
        return [tuple(line.split()) for line in ifile]


def load_parallel(source_path: str, target_path: str, skip_empty: bool=False) -> List[SentencePair]:
    """Read a parallel corpus; sentence ids are 1-based line numbers."""
    sources = read_sentences(source_path)
    targets = read_sentences(target_path)
    if len(sources) != len(targets):
        raise ConsistencyError("{} has {} lines but {} has {}".format(source_path, len(sources), target_path, len(targets)))
    pairs, nskipped = [], 0
    for lineno, (src, tgt) in enumerate(zip(sources, targets), 1):
        if not src or not tgt:
            if skip_empty:
                nskipped += 1
                continue
            raise ParseError(source_path if not src else target_path, lineno, "empty sentence")
        pairs.append(SentencePair(lineno, src, tgt))
    if nskipped:
        _log.warning("skipped %d sentence pairs with an empty side", nskipped)
    _log.debug("loaded %d sentence pairs from %s / %s", len(pairs), source_path, target_path)
    return pairs


def filter_by_length(pairs: Iterable[SentencePair], max_length: int=DEFAULT_MAX_LENGTH) -> List[SentencePair]:
    kept, ndropped = [], 0
    for pair in pairs:
        if len(pair.source) <= max_length and len(pair.target) <= max_length:
            kept.append(pair)
        else:
            ndropped += 1
    if ndropped:
        _log.info("dropped %d sentence pairs longer than %d tokens", ndropped, max_length)
    return kept


def write_sentences(pathname: str, sentences: Iterable[Iterable[str]]):
    with open(pathname, 'w', encoding='utf-8') as ofile:
        for tokens in sentences:
            print(' '.join(tokens), file=ofile)
