"""Per-token measurements on attention rows.

Logarithms are natural. Attention values are floored at ``LOG_FLOOR`` inside
logarithms so a zero where the reference puts mass gives a large finite loss.
"""

import math
import logging
from typing import Collection, Sequence
import numpy as np
from scipy.stats import rankdata
from common.errors import ContractError, UndefinedCorrelation

_log = logging.getLogger(__name__)
LOG_FLOOR = 1e-12


def _row(values) -> np.ndarray:
    row = np.asarray(values, dtype=np.float64)
    if row.ndim != 1:
        raise ContractError("expected a single row, got shape {}".format(row.shape))
    return row


def attention_loss(soft_row, attention_row) -> float:
    """Cross-entropy ``-sum_i Al_i log At_i``; terms with ``Al_i = 0`` contribute nothing."""
    soft, attention = _row(soft_row), _row(attention_row)
    if soft.shape != attention.shape:
        raise ContractError("soft alignment row has {} entries, attention row {}".format(soft.size, attention.size))
    support = soft > 0.0
    return float(-np.sum(soft[support] * np.log(np.maximum(attention[support], LOG_FLOOR))))


def attention_entropy(attention_row) -> float:
    """Shannon entropy of an attention row, with 0 log 0 taken as 0."""
    attention = _row(attention_row)
    support = attention > 0.0
    return float(max(0.0, -np.sum(attention[support] * np.log(attention[support]))))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: Pearson correlation of average ranks."""
    if len(xs) != len(ys):
        raise ContractError("spearman needs equal lengths, got {} and {}".format(len(xs), len(ys)))
    if len(xs) < 2:
        raise UndefinedCorrelation("spearman needs at least two observations")
    rx = rankdata(xs, method='average')
    ry = rankdata(ys, method='average')
    dx, dy = rx - rx.mean(), ry - ry.mean()
    sxx, syy = float(np.dot(dx, dx)), float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelation("zero rank variance")
    rho = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


def mass_on_alignment(attention_row, aligned_positions: Collection[int]) -> float:
    """Attention mass on the aligned source positions; 0 for an unaligned token."""
    attention = _row(attention_row)
    positions = sorted(set(aligned_positions))
    if positions and (positions[0] < 0 or positions[-1] >= attention.size):
        raise ContractError("aligned positions {} outside a row of length {}".format(positions, attention.size))
    if not positions:
        return 0.0
    return float(min(1.0, attention[positions].sum()))
