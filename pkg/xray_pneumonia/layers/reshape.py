"""Row-major flattening between the convolutional and dense stages."""

from typing import Optional, Sequence

import numpy as np

from ..errors import ShapeError
from ..tensor_core import Rng, Tensor
from .base import Layer, register_layer


def flatten(x: Tensor) -> Tensor:
    """C×H×W → vector of length C·H·W in row-major order."""
    return np.ascontiguousarray(x, dtype=np.float64).reshape(-1)


def unflatten(v: Tensor, shape: Sequence[int]) -> Tensor:
    v = np.asarray(v, dtype=np.float64)
    if v.size != int(np.prod(shape)):
        raise ShapeError.mismatch("cannot unflatten", v.shape, tuple(shape))
    return v.reshape(tuple(shape)).copy()


@register_layer
class FlattenLayer(Layer):
    """Flattens every sample of an N×C×H×W batch."""

    kind = "flatten"

    def __init__(self, name: str = "flatten"):
        super().__init__(name)
        self._shape: Optional[tuple] = None

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        x = np.ascontiguousarray(x, dtype=np.float64)
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out: Tensor) -> Tensor:
        return unflatten(grad_out, self._shape)
