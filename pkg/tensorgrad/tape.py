"""Dense float64 tensors and the tape that records primitive applications.

Operations applied while a ``Tape`` is active are recorded on it in execution
order, so the tape is a topological order of the computation by construction.
Outside of any tape nothing is recorded and the same operations act as plain
numpy evaluation, which is how evaluation-mode decoding runs.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence
import numpy as np
from common.errors import ContractError

_log = logging.getLogger(__name__)
_active_tapes = []  # type: List[Tape]


def as_real_array(value) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if any(d < 1 for d in array.shape):
        raise ContractError("array dimensions must be positive, got shape {}".format(array.shape))
    return array


class Tensor(object):

    def __init__(self, data, name: str=None):
        self.data = data if isinstance(data, np.ndarray) and data.dtype == np.float64 else as_real_array(data)
        self.name = name
        self.grad = None  # type: Optional[np.ndarray]
        self.tape = None  # type: Optional[Tape]

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        label = self.name or type(self).__name__
        return "{}(shape={})".format(label, self.data.shape)

    def __add__(self, other):
        from tensorgrad import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from tensorgrad import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from tensorgrad import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from tensorgrad import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from tensorgrad import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from tensorgrad import ops
        return ops.mul(other, self)

    def __neg__(self):
        from tensorgrad import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from tensorgrad import ops
        return ops.matmul(self, other)


class Parameter(Tensor):
    """Trainable tensor; its gradient accumulates across backward passes until reset."""

    def __init__(self, name: str, value):
        super(Parameter, self).__init__(as_real_array(value), name=name)
        self.grad = np.zeros_like(self.data)

    @property
    def value(self) -> np.ndarray:
        return self.data

    @property
    def gradient(self) -> np.ndarray:
        return self.grad

    def zero_grad(self):
        self.grad.fill(0.0)


def lift(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=np.float64))


class Node(object):

    def __init__(self, op: str, inputs: Sequence[Tensor], output: Tensor, forward: Callable, backward: Callable):
        self.op = op
        self.inputs = tuple(inputs)
        self.output = output
        self.forward = forward
        self.backward = backward

    def __repr__(self):
        return "Node({}, {} -> {})".format(self.op, [t.shape for t in self.inputs], self.output.shape)


class Tape(object):

    def __init__(self):
        self.nodes = []  # type: List[Node]

    def __enter__(self):
        _active_tapes.append(self)
        return self

    def __exit__(self, exc_type, exc_value, tb):
        popped = _active_tapes.pop()
        assert popped is self, "tapes must be exited in reverse order of entry"
        return False

    def __len__(self):
        return len(self.nodes)

    def record(self, node: Node):
        node.output.tape = self
        self.nodes.append(node)

    def replay(self) -> List[np.ndarray]:
        """Re-execute every recorded primitive from the leaf values and return the outputs in order."""
        values = {}  # type: Dict[int, np.ndarray]
        outputs = []
        for node in self.nodes:
            arrays = [values.get(id(t), t.data) for t in node.inputs]
            result = node.forward(*arrays)
            values[id(node.output)] = result
            outputs.append(result)
        return outputs

    def backward(self, loss: Tensor):
        if loss.tape is not self:
            raise ContractError("loss was not produced through this tape")
        if loss.data.size != 1:
            raise ContractError("backward requires a scalar loss, got shape {}".format(loss.data.shape))
        grads = {id(loss): np.ones_like(loss.data)}  # type: Dict[int, np.ndarray]
        leaves = {}  # type: Dict[int, Tensor]
        nvisited = 0
        for node in reversed(self.nodes):
            g = grads.pop(id(node.output), None)
            if g is None:
                continue
            nvisited += 1
            input_grads = node.backward(g, node.output.data, *[t.data for t in node.inputs])
            for tensor, input_grad in zip(node.inputs, input_grads):
                if input_grad is None:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + input_grad
                else:
                    grads[key] = input_grad
                if tensor.tape is not self:
                    leaves[key] = tensor
        for key, tensor in leaves.items():
            g = grads[key]
            if tensor.grad is None:
                tensor.grad = np.array(g, dtype=np.float64)
            else:
                tensor.grad += g
        _log.debug("backward visited %d of %d nodes, %d leaves", nvisited, len(self.nodes), len(leaves))


def current_tape() -> Optional[Tape]:
    return _active_tapes[-1] if _active_tapes else None


def apply(op: str, forward: Callable, backward: Callable, *inputs) -> Tensor:
    """Evaluate a primitive and record it on the active tape, if any.

    ``forward`` maps input arrays to the output array; ``backward`` maps
    (output gradient, output, *input arrays) to one gradient (or None) per input.
    """
    tensors = [lift(x) for x in inputs]
    output = Tensor(forward(*[t.data for t in tensors]))
    tape = current_tape()
    if tape is not None:
        tape.record(Node(op, tensors, output, forward, backward))
    return output


def backward(loss: Tensor):
    if loss.tape is None:
        raise ContractError("loss was not produced through a tape")
    loss.tape.backward(loss)
