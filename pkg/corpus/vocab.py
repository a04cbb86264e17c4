import logging
from collections import Counter
from typing import Iterable, List, Sequence, Tuple
from common.errors import ConfigError, ContractError, ParseError

_log = logging.getLogger(__name__)

PAD = '<pad>'
UNK = '<unk>'
BOS = '<s>'
EOS = '</s>'
RESERVED = (PAD, UNK, BOS, EOS)


class Vocabulary(object):
    """Bijection between tokens and indices; the reserved tokens occupy indices 0-3."""

    def __init__(self, tokens: Sequence[str]):
        tokens = list(tokens)
        if tuple(tokens[:len(RESERVED)]) != RESERVED:
            raise ContractError("vocabulary must start with the reserved tokens {}".format(RESERVED))
        self.tokens = tuple(tokens)
        self.index = {}
        for i, token in enumerate(self.tokens):
            if token in self.index:
                raise ContractError("duplicate vocabulary token {!r}".format(token))
            self.index[token] = i

    @classmethod
    def build(cls, corpus: Iterable[Sequence[str]], max_size: int):
        """Keep the ``max_size`` most frequent tokens; ties go to the earlier first occurrence."""
        if not isinstance(max_size, int) or max_size < 1:
            raise ConfigError('max_size', "must be a positive integer, got {}".format(max_size))
        counts = Counter()
        first_seen = {}
        nsentences = 0
        for sentence in corpus:
            nsentences += 1
            for token in sentence:
                if token in RESERVED:
                    continue
                counts[token] += 1
                if token not in first_seen:
                    first_seen[token] = len(first_seen)
        if nsentences == 0:
            raise ContractError("cannot build a vocabulary from an empty corpus")
        ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
        kept = ranked[:max_size]
        _log.debug("vocabulary keeps %d of %d distinct tokens", len(kept), len(ranked))
        return cls(list(RESERVED) + kept)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __hash__(self):
        return hash(self.tokens)

    @property
    def pad_id(self):
        return 0

    @property
    def unk_id(self):
        return 1

    @property
    def bos_id(self):
        return 2

    @property
    def eos_id(self):
        return 3

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.index.get(t, self.unk_id) for t in tokens]

    def encode_flagged(self, tokens: Sequence[str]) -> Tuple[List[int], List[int]]:
        """Encode and also return the positions that fell back to UNK."""
        ids = self.encode(tokens)
        unknown = [k for k, (t, i) in enumerate(zip(tokens, ids)) if i == self.unk_id and t != UNK]
        return ids, unknown

    def decode(self, ids: Iterable[int]) -> List[str]:
        return [self.tokens[i] for i in ids]

    def save(self, pathname: str):
        with open(pathname, 'w', encoding='utf-8') as ofile:
            for token in self.tokens:
                print(token, file=ofile)

    @classmethod
    def load(cls, pathname: str):
        tokens = []
        with open(pathname, 'r', encoding='utf-8') as ifile:
            for lineno, line in enumerate(ifile, 1):
                token = line.rstrip('\n')
                if not token or token.split() != [token]:
                    raise ParseError(pathname, lineno, "vocabulary line must hold exactly one token")
                tokens.append(token)
        return cls(tokens)
