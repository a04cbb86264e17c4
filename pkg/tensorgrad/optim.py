import math
import logging
from typing import Iterable, Mapping, Tuple, Union
import numpy as np
from common.errors import ConfigError
from tensorgrad.tape import Parameter

_log = logging.getLogger(__name__)

ParameterSet = Union[Mapping[str, Parameter], Iterable[Parameter]]


def _as_list(params: ParameterSet):
    if isinstance(params, Mapping):
        return list(params.values())
    return list(params)


def global_norm(params: ParameterSet) -> float:
    return math.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in _as_list(params)))


def clip_gradients(params: ParameterSet, clip_norm: float) -> Tuple[float, float]:
    """Rescale all gradients jointly so their global L2 norm is at most ``clip_norm``.

    Returns the norm before clipping and the factor applied.
    """
    if not clip_norm > 0:
        raise ConfigError('clip_norm', "must be positive, got {}".format(clip_norm))
    params = _as_list(params)
    norm = global_norm(params)
    scale = 1.0
    if norm > clip_norm:
        scale = clip_norm / norm
        for p in params:
            p.grad *= scale
    return norm, scale


def sgd_step(params: ParameterSet, learning_rate: float, clip_norm: float):
    """Clipped plain SGD update; gradients are reset to zero afterwards."""
    if not learning_rate > 0:
        raise ConfigError('learning_rate', "must be positive, got {}".format(learning_rate))
    plist = _as_list(params)
    norm, scale = clip_gradients(plist, clip_norm)
    if scale != 1.0:
        _log.debug("gradient norm %.4f clipped to %.4f", norm, clip_norm)
    for p in plist:
        p.data -= learning_rate * p.grad
        p.zero_grad()
    return params
