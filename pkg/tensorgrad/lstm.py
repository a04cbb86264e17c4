import logging
from typing import NamedTuple, Tuple
import numpy as np
from common.errors import ShapeError
from tensorgrad import ops
from tensorgrad.tape import Parameter, Tensor

_log = logging.getLogger(__name__)
INIT_SCALE = 0.08


def uniform_init(shape, rng: np.random.Generator, scale: float=INIT_SCALE) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


class LSTMWeights(NamedTuple):
    """Weights of one LSTM layer; gate columns are ordered input, forget, output, candidate."""

    input_weights: Parameter
    hidden_weights: Parameter
    bias: Parameter

    @property
    def hidden_size(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def input_size(self) -> int:
        return self.input_weights.shape[0]

    @classmethod
    def create(cls, prefix: str, input_size: int, hidden_size: int, rng: np.random.Generator=None):
        if rng is None:
            shapes = [(input_size, 4 * hidden_size), (hidden_size, 4 * hidden_size), (4 * hidden_size,)]
            values = [np.zeros(s) for s in shapes]
        else:
            values = [uniform_init((input_size, 4 * hidden_size), rng),
                      uniform_init((hidden_size, 4 * hidden_size), rng),
                      uniform_init((4 * hidden_size,), rng)]
        return cls(Parameter(prefix + '.W_x', values[0]),
                   Parameter(prefix + '.W_h', values[1]),
                   Parameter(prefix + '.b', values[2]))


def lstm_cell(x, prev_hidden, prev_cell, weights: LSTMWeights) -> Tuple[Tensor, Tensor]:
    """One LSTM step over a batch: x (B, in), prev_hidden and prev_cell (B, H)."""
    hidden = weights.hidden_size
    if weights.input_weights.shape[1] != 4 * hidden or weights.bias.shape != (4 * hidden,):
        raise ShapeError("lstm weights inconsistent", weights.input_weights.shape, weights.hidden_weights.shape, weights.bias.shape)
    xs, hs, cs = ops._shape_of(x), ops._shape_of(prev_hidden), ops._shape_of(prev_cell)
    if xs[-1] != weights.input_size:
        raise ShapeError("lstm input width differs from configured input size", xs, weights.input_weights.shape)
    if hs != cs or hs[-1] != hidden:
        raise ShapeError("lstm state width differs from configured hidden size", hs, cs, weights.hidden_weights.shape)
    gates = ops.add(ops.add(ops.matmul(x, weights.input_weights), ops.matmul(prev_hidden, weights.hidden_weights)), weights.bias)
    input_gate = ops.sigmoid(ops.columns(gates, 0, hidden))
    forget_gate = ops.sigmoid(ops.columns(gates, hidden, 2 * hidden))
    output_gate = ops.sigmoid(ops.columns(gates, 2 * hidden, 3 * hidden))
    candidate = ops.tanh(ops.columns(gates, 3 * hidden, 4 * hidden))
    cell = ops.add(ops.mul(forget_gate, prev_cell), ops.mul(input_gate, candidate))
    hidden_state = ops.mul(output_gate, ops.tanh(cell))
    return hidden_state, cell
