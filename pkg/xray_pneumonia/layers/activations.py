"""
Elementwise activations and the softmax probability map.
"""

from typing import Optional, Union

import numpy as np

from ..errors import ParameterError, ShapeError
from ..models.enums import ActivationKind
from ..tensor_core import Rng, Tensor
from .base import Layer, register_layer

KindLike = Union[ActivationKind, str]


def _kind(kind: KindLike) -> ActivationKind:
    try:
        return ActivationKind(kind) if not isinstance(kind, ActivationKind) else kind
    except ValueError as exc:
        raise ParameterError(f"unknown activation: {kind!r}") from exc


def sigmoid(x: Tensor) -> Tensor:
    """Logistic function, split by sign so exp never overflows."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def activation_apply(x: Tensor, kind: KindLike) -> Tensor:
    """
    Apply relu, tanh, sigmoid or none elementwise.
    """
    kind = _kind(kind)
    x = np.asarray(x, dtype=np.float64)
    if kind == ActivationKind.RELU:
        return np.maximum(x, 0.0)
    if kind == ActivationKind.TANH:
        return np.tanh(x)
    if kind == ActivationKind.SIGMOID:
        return sigmoid(x)
    return x.copy()


def activation_grad(x: Tensor, kind: KindLike, grad_out: Tensor) -> Tensor:
    """
    Gradient of the activation at pre-activation x, times grad_out.

    The relu subgradient at exactly 0 is 0.
    """
    kind = _kind(kind)
    x = np.asarray(x, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if x.shape != grad_out.shape:
        raise ShapeError.mismatch("activation grad_out does not match input", grad_out.shape, x.shape)
    if kind == ActivationKind.RELU:
        return grad_out * (x > 0)
    if kind == ActivationKind.TANH:
        t = np.tanh(x)
        return grad_out * (1.0 - t * t)
    if kind == ActivationKind.SIGMOID:
        s = sigmoid(x)
        return grad_out * s * (1.0 - s)
    return grad_out.copy()


def softmax(z: Tensor) -> Tensor:
    """
    Softmax over the last axis with max subtraction.

    Raises:
        ShapeError: empty last axis
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 0 or z.shape[-1] < 1:
        raise ShapeError.mismatch("softmax needs at least one logit", z.shape)
    shifted = np.exp(z - z.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def softmax_backward(p: Tensor, grad_out: Tensor) -> Tensor:
    """Jacobian-vector product of softmax given its output p."""
    p = np.asarray(p, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if p.shape != grad_out.shape:
        raise ShapeError.mismatch("softmax grad_out does not match output", grad_out.shape, p.shape)
    return p * (grad_out - (grad_out * p).sum(axis=-1, keepdims=True))


@register_layer
class ActivationLayer(Layer):
    kind = "activation"

    def __init__(self, activation: KindLike = ActivationKind.RELU, name: str = "act"):
        super().__init__(name)
        self.activation = _kind(activation)
        self._input: Optional[Tensor] = None

    def config(self):
        return {"activation": self.activation.value}

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        self._input = np.asarray(x, dtype=np.float64)
        return activation_apply(self._input, self.activation)

    def backward(self, grad_out: Tensor) -> Tensor:
        return activation_grad(self._input, self.activation, grad_out)


@register_layer
class SoftmaxLayer(Layer):
    kind = "softmax"

    def __init__(self, name: str = "softmax"):
        super().__init__(name)
        self._output: Optional[Tensor] = None

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        self._output = softmax(x)
        return self._output

    def backward(self, grad_out: Tensor) -> Tensor:
        return softmax_backward(self._output, grad_out)
