"""
Adam optimizer.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

from ..errors import ParameterError, ShapeError
from ..tensor_core import Tensor

NamedParams = Union[Mapping[str, Tensor], Iterable[Tuple[str, Tensor]]]


@dataclass
class AdamState:
    """First and second moment estimates per named parameter."""
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, Tensor] = field(default_factory=dict)
    v: Dict[str, Tensor] = field(default_factory=dict)

    def __post_init__(self):
        if self.lr < 0:
            raise ParameterError(f"learning rate must be non-negative, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ParameterError(f"Adam betas must be in [0, 1), got {self.beta1}, {self.beta2}")
        if not self.eps > 0:
            raise ParameterError(f"Adam epsilon must be positive, got {self.eps}")


def adam_step(state: AdamState, params: NamedParams, grads: Mapping[str, Tensor]) -> Dict[str, Tensor]:
    """
    One Adam update applied in place to every parameter array.

    Args:
        state: Optimizer state; t is incremented
        params: Named parameter arrays (dict or (name, array) pairs)
        grads: Gradients keyed by the same names

    Returns:
        The updated parameters by name (the same array objects)

    Raises:
        ShapeError: a gradient or moment shape differs from its parameter
        ParameterError: a parameter has no gradient
    """
    items = list(params.items()) if isinstance(params, Mapping) else list(params)
    for name, param in items:
        if name not in grads:
            raise ParameterError(f"no gradient for parameter {name!r}")
        if np.shape(grads[name]) != param.shape:
            raise ShapeError.mismatch(f"gradient shape for {name!r}", np.shape(grads[name]), param.shape)
        if name in state.m and state.m[name].shape != param.shape:
            raise ShapeError.mismatch(f"moment shape for {name!r}", state.m[name].shape, param.shape)

    state.t += 1
    bias1 = 1.0 - state.beta1 ** state.t
    bias2 = 1.0 - state.beta2 ** state.t

    for name, param in items:
        g = np.asarray(grads[name], dtype=np.float64)
        m = state.m.setdefault(name, np.zeros_like(param))
        v = state.v.setdefault(name, np.zeros_like(param))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        param -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)

    return dict(items)
