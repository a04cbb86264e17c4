"""Central finite-difference checks of tape gradients."""

import logging
from typing import Callable, Dict, Iterable
import numpy as np
from tensorgrad.tape import Tape, Tensor

_log = logging.getLogger(__name__)
DEFAULT_STEP = 1e-5


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float=1e-3) -> float:
    """Largest elementwise ``|a - n| / max(|a|, |n|, floor)``."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def analytic_gradients(loss_fn: Callable[[], Tensor], tensors: Iterable[Tensor]) -> Dict[int, np.ndarray]:
    tensors = list(tensors)
    for t in tensors:
        t.grad = np.zeros_like(t.data)
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    return {id(t): t.grad.copy() for t in tensors}


def numeric_gradient(loss_fn: Callable[[], Tensor], tensor: Tensor, step: float=DEFAULT_STEP) -> np.ndarray:
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        original = flat[k]
        flat[k] = original + step
        plus = loss_fn().item()
        flat[k] = original - step
        minus = loss_fn().item()
        flat[k] = original
        gflat[k] = (plus - minus) / (2.0 * step)
    return grad


def check_gradients(loss_fn: Callable[[], Tensor], tensors: Iterable[Tensor], step: float=DEFAULT_STEP, floor: float=1e-3) -> float:
    """Return the worst relative error between tape and finite-difference gradients over ``tensors``."""
    tensors = list(tensors)
    analytic = analytic_gradients(loss_fn, tensors)
    worst = 0.0
    for t in tensors:
        numeric = numeric_gradient(loss_fn, t, step)
        err = relative_error(analytic[id(t)], numeric, floor)
        _log.debug("gradient check %s: relative error %.3e", t, err)
        worst = max(worst, err)
    return worst
