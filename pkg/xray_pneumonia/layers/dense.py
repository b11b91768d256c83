"""Fully connected layer: φ(W·x + bias)."""

from typing import Optional, Tuple

import numpy as np

from ..errors import ParameterError, ShapeError
from ..models.enums import ActivationKind
from ..tensor_core import Rng, Tensor, matmul, transpose
from .activations import KindLike, _kind, activation_apply, activation_grad
from .base import Layer, as_batch, register_layer
from .init import glorot_uniform


@register_layer
class DenseLayer(Layer):
    """
    Dense layer with weights W (out×in), bias (out) and an activation.

    The pre-activation of the last forward call is cached for backward.
    """

    kind = "dense"

    def __init__(
        self,
        in_features: int,
        out_features: int,
        activation: KindLike = ActivationKind.NONE,
        rng: Optional[Rng] = None,
        name: str = "dense"
    ):
        super().__init__(name)
        if in_features <= 0 or out_features <= 0:
            raise ParameterError(f"dense sizes must be positive: in={in_features} out={out_features}")
        self.in_features = in_features
        self.out_features = out_features
        self.activation = _kind(activation)

        shape = (out_features, in_features)
        weights = np.zeros(shape) if rng is None else glorot_uniform(rng, shape, in_features, out_features)
        self.params = {"weights": weights, "bias": np.zeros(out_features)}
        self._input: Optional[Tensor] = None
        self._pre: Optional[Tensor] = None

    @property
    def weights(self) -> Tensor:
        return self.params["weights"]

    @property
    def bias(self) -> Tensor:
        return self.params["bias"]

    def config(self):
        return {
            "in_features": self.in_features,
            "out_features": self.out_features,
            "activation": self.activation.value
        }

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        self._input = x
        out, self._pre = dense_forward(self, x, return_pre=True)
        return out

    def backward(self, grad_out: Tensor) -> Tensor:
        grad_x, grad_w, grad_b = dense_backward(self, self._input, grad_out, pre=self._pre)
        self.grads = {"weights": grad_w, "bias": grad_b}
        return grad_x


def _pre_activation(layer: DenseLayer, x: Tensor) -> Tuple[Tensor, bool]:
    x, single = as_batch(x, 1)
    if x.ndim != 2 or x.shape[1] != layer.in_features:
        raise ShapeError.mismatch(f"{layer.name}: input length does not match in_features", x.shape, (layer.in_features,))
    return matmul(x, transpose(layer.weights)) + layer.bias, single


def dense_forward(layer: DenseLayer, x: Tensor, return_pre: bool = False):
    """
    φ(W·x + bias) for a vector or an N×in batch.

    Raises:
        ShapeError: input length differs from in_features
    """
    pre, single = _pre_activation(layer, x)
    out = activation_apply(pre, layer.activation)
    if single:
        out, pre = out[0], pre[0]
    return (out, pre) if return_pre else out


def dense_backward(
    layer: DenseLayer,
    x: Tensor,
    grad_out: Tensor,
    pre: Optional[Tensor] = None
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Gradients with respect to x, W and bias, composed with activation_grad.
    """
    if pre is None:
        pre = dense_forward(layer, x, return_pre=True)[1]
    xb, single = as_batch(x, 1)
    grad_pre = activation_grad(pre, layer.activation, grad_out)
    grad_pre, _ = as_batch(grad_pre, 1)
    if grad_pre.shape != (xb.shape[0], layer.out_features):
        raise ShapeError.mismatch(f"{layer.name}: grad_out does not match output", grad_pre.shape, (xb.shape[0], layer.out_features))

    grad_w = matmul(transpose(grad_pre), xb)
    grad_b = grad_pre.sum(axis=0)
    grad_x = matmul(grad_pre, layer.weights)
    return (grad_x[0] if single else grad_x), grad_w, grad_b
