"""Corpus-level BLEU over pre-tokenized sentences."""

import math
import logging
from collections import Counter
from typing import List, NamedTuple, Sequence, Tuple
from common.errors import ContractError

_log = logging.getLogger(__name__)
MAX_ORDER = 4


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


class BleuScore(NamedTuple):

    score: float
    precisions: Tuple[float, ...]
    brevity_penalty: float
    candidate_length: int
    reference_length: int
    matches: Tuple[int, ...]
    totals: Tuple[int, ...]


def corpus_bleu(candidates: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
                max_order: int=MAX_ORDER, smoothing: float=0.0) -> BleuScore:
    """Geometric mean of clipped n-gram precisions times the brevity penalty.

    Counts are summed over the corpus before dividing. With ``smoothing`` of 0
    any zero precision makes the score 0; a positive value is added to the
    numerator and denominator of every order instead.
    """
    if len(candidates) != len(references):
        raise ContractError("{} candidates for {} references".format(len(candidates), len(references)))
    if not candidates:
        raise ContractError("BLEU of an empty corpus is undefined")
    if smoothing < 0:
        raise ContractError("smoothing must be nonnegative")
    matches = [0] * max_order
    totals = [0] * max_order
    cand_len, ref_len = 0, 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            cand_counts, ref_counts = ngrams(cand, n), ngrams(ref, n)
            matches[n - 1] += sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
            totals[n - 1] += max(len(cand) - n + 1, 0)
    precisions = []
    for m, t in zip(matches, totals):
        if smoothing > 0:
            precisions.append((m + smoothing) / (t + smoothing))
        else:
            precisions.append(m / t if t > 0 else 0.0)
    if cand_len == 0:
        bp = 0.0
    elif cand_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / cand_len)
    if min(precisions) == 0.0:
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / max_order)
    _log.debug("bleu %.4f, precisions %s, bp %.4f", score, precisions, bp)
    return BleuScore(score, tuple(precisions), bp, cand_len, ref_len, tuple(matches), tuple(totals))


def bleu(candidates: Sequence[Sequence[str]], references: Sequence[Sequence[str]], smoothing: float=0.0) -> float:
    return corpus_bleu(candidates, references, smoothing=smoothing).score


def read_tokenized(pathname: str) -> List[Tuple[str, ...]]:
    with open(pathname, 'r', encoding='utf-8') as ifile:
        return [tuple(line.split()) for line in ifile]
