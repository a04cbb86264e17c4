"""Differentiable primitives.

Every primitive is a forward function over float64 arrays plus its adjoint;
``tape.apply`` does the recording. Constants such as masks and token ids are
captured in closures so that replaying a tape needs only the tensor inputs.
"""

import logging
from typing import Sequence
import numpy as np
from scipy.special import expit
from common.errors import ShapeError, InvalidMaskError, ContractError, ConfigError
from tensorgrad.tape import Tensor, apply

_log = logging.getLogger(__name__)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _shape_of(x):
    return x.shape if isinstance(x, Tensor) else np.shape(x)


def _check_broadcast(op, a, b):
    try:
        np.broadcast_shapes(_shape_of(a), _shape_of(b))
    except ValueError:
        raise ShapeError("{}: shapes do not broadcast".format(op), _shape_of(a), _shape_of(b))


def add(a, b) -> Tensor:
    _check_broadcast('add', a, b)
    return apply('add',
                 lambda x, y: x + y,
                 lambda g, out, x, y: (_unbroadcast(g, x.shape), _unbroadcast(g, y.shape)),
                 a, b)


def sub(a, b) -> Tensor:
    _check_broadcast('sub', a, b)
    return apply('sub',
                 lambda x, y: x - y,
                 lambda g, out, x, y: (_unbroadcast(g, x.shape), _unbroadcast(-g, y.shape)),
                 a, b)


def mul(a, b) -> Tensor:
    _check_broadcast('mul', a, b)
    return apply('mul',
                 lambda x, y: x * y,
                 lambda g, out, x, y: (_unbroadcast(g * y, x.shape), _unbroadcast(g * x, y.shape)),
                 a, b)


def matmul(a, b) -> Tensor:
    sa, sb = _shape_of(a), _shape_of(b)
    if len(sa) != 2 or len(sb) != 2 or sa[1] != sb[0]:
        raise ShapeError("matmul: inner dimensions disagree", sa, sb)
    return apply('matmul',
                 lambda x, y: x @ y,
                 lambda g, out, x, y: (g @ y.T, x.T @ g),
                 a, b)


def tanh(a) -> Tensor:
    return apply('tanh',
                 np.tanh,
                 lambda g, out, x: (g * (1.0 - out * out),),
                 a)


def sigmoid(a) -> Tensor:
    return apply('sigmoid',
                 expit,
                 lambda g, out, x: (g * out * (1.0 - out),),
                 a)


def log(a) -> Tensor:
    return apply('log',
                 np.log,
                 lambda g, out, x: (g / x,),
                 a)


def total(a) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    return apply('sum',
                 lambda x: np.array(x.sum()),
                 lambda g, out, x: (np.full_like(x, float(g)),),
                 a)


def concat(tensors: Sequence, axis: int=-1) -> Tensor:
    shapes = [_shape_of(t) for t in tensors]
    ndim = len(shapes[0])
    axis = axis % ndim
    for s in shapes[1:]:
        if len(s) != ndim or any(s[k] != shapes[0][k] for k in range(ndim) if k != axis):
            raise ShapeError("concat: shapes disagree off axis {}".format(axis), shapes[0], s)
    bounds = np.cumsum([s[axis] for s in shapes])[:-1]

    def _backward(g, out, *xs):
        return tuple(np.split(g, bounds, axis=axis))

    return apply('concat', lambda *xs: np.concatenate(xs, axis=axis), _backward, *tensors)


def columns(a, start: int, stop: int) -> Tensor:
    """Slice ``[start, stop)`` of the last axis."""
    width = _shape_of(a)[-1]
    if not 0 <= start < stop <= width:
        raise ShapeError("columns [{}, {}) outside width {}".format(start, stop, width), _shape_of(a))

    def _backward(g, out, x):
        full = np.zeros_like(x)
        full[..., start:stop] = g
        return (full,)

    return apply('columns', lambda x: x[..., start:stop].copy(), _backward, a)


def stack(tensors: Sequence, axis: int=1) -> Tensor:
    """Stack equally shaped tensors along a new axis."""
    shapes = [_shape_of(t) for t in tensors]
    for s in shapes[1:]:
        if s != shapes[0]:
            raise ShapeError("stack: shapes disagree", shapes[0], s)

    def _backward(g, out, *xs):
        return tuple(np.take(g, k, axis=axis) for k in range(len(xs)))

    return apply('stack', lambda *xs: np.stack(xs, axis=axis), _backward, *tensors)


def select(mask, when_true, when_false) -> Tensor:
    """Elementwise choice by a constant boolean mask broadcast against the operands."""
    m = np.asarray(mask, dtype=bool)
    _check_broadcast('select', when_true, when_false)
    return apply('select',
                 lambda x, y: np.where(m, x, y),
                 lambda g, out, x, y: (_unbroadcast(np.where(m, g, 0.0), x.shape),
                                       _unbroadcast(np.where(m, 0.0, g), y.shape)),
                 when_true, when_false)


def batched_scores(states, query) -> Tensor:
    """Dot product of each state ``states[b, i, :]`` with ``query[b, :]``; shape (B, S)."""
    ss, sq = _shape_of(states), _shape_of(query)
    if len(ss) != 3 or len(sq) != 2 or ss[0] != sq[0] or ss[2] != sq[1]:
        raise ShapeError("scores: state and query dimensions disagree", ss, sq)
    return apply('batched_scores',
                 lambda h, q: np.einsum('bsd,bd->bs', h, q),
                 lambda g, out, h, q: (g[:, :, None] * q[:, None, :], np.einsum('bs,bsd->bd', g, h)),
                 states, query)


def weighted_sum(weights, states) -> Tensor:
    """Context vectors ``sum_i weights[b, i] * states[b, i, :]``; shape (B, d)."""
    sw, ss = _shape_of(weights), _shape_of(states)
    if len(sw) != 2 or len(ss) != 3 or sw != ss[:2]:
        raise ShapeError("weighted_sum: weights and states disagree", sw, ss)
    return apply('weighted_sum',
                 lambda a, h: np.einsum('bs,bsd->bd', a, h),
                 lambda g, out, a, h: (np.einsum('bd,bsd->bs', g, h), a[:, :, None] * g[:, None, :]),
                 weights, states)


def masked_softmax_array(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    shifted = np.where(mask, scores, -np.inf)
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    exps = np.where(mask, np.exp(shifted), 0.0)
    return exps / exps.sum(axis=-1, keepdims=True)


def masked_softmax(scores, mask) -> Tensor:
    """Softmax over the last axis restricted to positions where ``mask`` is true.

    Masked-out positions get exactly zero probability and zero gradient.
    """
    m = np.asarray(mask, dtype=bool)
    shape = _shape_of(scores)
    if m.shape != shape:
        raise ShapeError("masked_softmax: mask and scores disagree", m.shape, shape)
    if not np.all(m.any(axis=-1)):
        raise InvalidMaskError("masked_softmax needs at least one unmasked position per row")

    def _backward(g, out, x):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return apply('masked_softmax', lambda x: masked_softmax_array(x, m), _backward, scores)


def embedding(table, ids) -> Tensor:
    """Rows of ``table`` selected by integer ``ids``; gradient scatters back with accumulation."""
    idx = np.asarray(ids, dtype=np.int64)
    nrows = _shape_of(table)[0]
    if idx.size and (idx.min() < 0 or idx.max() >= nrows):
        raise ContractError("token id out of range [0, {}): {}".format(nrows, idx.tolist()))

    def _backward(g, out, w):
        full = np.zeros_like(w)
        np.add.at(full, idx, g)
        return (full,)

    return apply('embedding', lambda w: w[idx], _backward, table)


def log_softmax_array(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax_cross_entropy(logits, targets) -> Tensor:
    """Per-row negative log-probability of ``targets`` under softmax(logits); shape (B,)."""
    idx = np.asarray(targets, dtype=np.int64)
    shape = _shape_of(logits)
    if len(shape) != 2 or idx.shape != (shape[0],):
        raise ShapeError("cross entropy: logits and targets disagree", shape, idx.shape)
    rows = np.arange(shape[0])

    def _forward(z):
        return -log_softmax_array(z)[rows, idx]

    def _backward(g, out, z):
        probs = np.exp(log_softmax_array(z))
        probs[rows, idx] -= 1.0
        return (probs * g[:, None],)

    return apply('softmax_cross_entropy', _forward, _backward, logits)


def dropout(x, rate: float, rng=None, training: bool=True) -> Tensor:
    """Inverted dropout; identity in evaluation mode or at rate 0.

    ``rng`` is a seed or a ``numpy.random.Generator``; the same seed gives the same mask.
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigError('dropout', "rate must lie in [0, 1), got {}".format(rate))
    if not training or rate == 0.0:
        return x if isinstance(x, Tensor) else Tensor(x)
    generator = np.random.default_rng(rng)
    keep = generator.random(_shape_of(x)) >= rate
    scale = np.where(keep, 1.0 / (1.0 - rate), 0.0)
    return apply('dropout', lambda v: v * scale, lambda g, out, v: (g * scale,), x)
