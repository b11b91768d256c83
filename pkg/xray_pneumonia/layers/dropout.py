"""Inverted dropout."""

from typing import Optional, Tuple

import numpy as np

from ..errors import ParameterError, ShapeError
from ..models.enums import LayerMode
from ..tensor_core import Rng, Tensor
from .base import Layer, register_layer


@register_layer
class DropoutLayer(Layer):
    """
    Zeroes each element with probability `rate` in train mode and scales the
    survivors by 1 / (1 - rate). Eval mode is the identity.
    """

    kind = "dropout"

    def __init__(self, rate: float = 0.4, name: str = "dropout"):
        super().__init__(name)
        if not 0.0 <= rate < 1.0:
            raise ParameterError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = float(rate)
        self._mask: Optional[Tensor] = None

    def config(self):
        return {"rate": self.rate}

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        out, self._mask = dropout_forward(self, x, rng)
        return out

    def backward(self, grad_out: Tensor) -> Tensor:
        return dropout_backward(self._mask, grad_out)


def dropout_forward(layer: DropoutLayer, x: Tensor, rng: Optional[Rng]) -> Tuple[Tensor, Tensor]:
    """
    Returns:
        Output and the scaled keep-mask used by dropout_backward

    Raises:
        ParameterError: train mode without a random stream
    """
    x = np.asarray(x, dtype=np.float64)
    if layer.mode == LayerMode.EVAL or layer.rate == 0.0:
        return x, np.ones_like(x)
    if rng is None:
        raise ParameterError(f"{layer.name}: train-mode dropout needs a random stream")
    keep = rng.random(x.shape) >= layer.rate
    mask = keep / (1.0 - layer.rate)
    return x * mask, mask


def dropout_backward(mask: Tensor, grad_out: Tensor) -> Tensor:
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if mask.shape != grad_out.shape:
        raise ShapeError.mismatch("dropout grad_out does not match mask", grad_out.shape, mask.shape)
    return grad_out * mask
