"""
Non-overlapping max pooling.

Ties go to the first winner in row-major window order (numpy argmax), which
keeps the backward routing deterministic.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import ParameterError, ShapeError
from ..tensor_core import Rng, Tensor
from .base import Layer, as_batch, register_layer


@dataclass(frozen=True)
class PoolIndices:
    """Winner positions recorded by maxpool_forward."""

    argmax: np.ndarray  # N×C×H'×W', flat offset inside each window
    input_shape: Tuple[int, ...]
    window: int
    single: bool = False

    @property
    def output_shape(self) -> Tuple[int, ...]:
        return self.argmax.shape[1:] if self.single else self.argmax.shape


def _windows(x: Tensor, window: int) -> Tensor:
    n, c, h, w = x.shape
    blocks = x.reshape(n, c, h // window, window, w // window, window)
    return blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // window, w // window, window * window)


def maxpool_forward(x: Tensor, window: int = 2, stride: int = 2) -> Tuple[Tensor, PoolIndices]:
    """
    Max over each window×window block.

    Args:
        x: C×H×W or N×C×H×W input
        window: Window side
        stride: Must equal window

    Returns:
        Pooled tensor and the winner indices for maxpool_backward

    Raises:
        ShapeError: H or W not divisible by the window
    """
    if window <= 0 or stride != window:
        raise ParameterError(f"only non-overlapping pooling is supported (window={window}, stride={stride})")
    x, single = as_batch(x, 3)
    if x.ndim != 4:
        raise ShapeError.mismatch("maxpool expects C×H×W or N×C×H×W input", x.shape)
    if x.shape[2] % window or x.shape[3] % window:
        raise ShapeError.mismatch(f"maxpool input spatial size must be divisible by {window}", x.shape[-2:])

    blocks = _windows(x, window)
    argmax = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]
    indices = PoolIndices(argmax=argmax, input_shape=x.shape, window=window, single=single)
    return (out[0] if single else out), indices


def maxpool_backward(indices: PoolIndices, grad_out: Tensor) -> Tensor:
    """
    Route each output gradient to its window winner; every other entry is zero.

    Raises:
        ShapeError: grad_out does not match the forward output
    """
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != tuple(indices.output_shape):
        raise ShapeError.mismatch("maxpool grad_out does not match forward output", grad_out.shape, indices.output_shape)
    if indices.single:
        grad_out = grad_out[None]

    n, c, h, w = indices.input_shape
    k = indices.window
    routed = np.zeros(indices.argmax.shape + (k * k,), dtype=np.float64)
    np.put_along_axis(routed, indices.argmax[..., None], grad_out[..., None], axis=-1)
    grad_x = routed.reshape(n, c, h // k, w // k, k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
    return grad_x[0] if indices.single else grad_x


@register_layer
class MaxPool2dLayer(Layer):
    """
    Max pooling layer.

    With odd="pad" an odd spatial size gets one trailing row or column of
    -inf (ceil output size); with odd="error" it is rejected.
    """

    kind = "maxpool2d"

    def __init__(self, window: int = 2, odd: str = "pad", name: str = "pool"):
        super().__init__(name)
        if odd not in ("pad", "error"):
            raise ParameterError(f"odd policy must be 'pad' or 'error', got {odd!r}")
        self.window = window
        self.odd = odd
        self._indices: Optional[PoolIndices] = None
        self._crop: Tuple[int, int] = (0, 0)

    def config(self):
        return {"window": self.window, "odd": self.odd}

    def output_size(self, size: int) -> int:
        if self.odd == "pad":
            return -(-size // self.window)
        return size // self.window

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        x = np.asarray(x, dtype=np.float64)
        h, w = x.shape[-2:]
        pad_h = (-h) % self.window if self.odd == "pad" else 0
        pad_w = (-w) % self.window if self.odd == "pad" else 0
        if pad_h or pad_w:
            widths = [(0, 0)] * (x.ndim - 2) + [(0, pad_h), (0, pad_w)]
            x = np.pad(x, widths, constant_values=-np.inf)
        self._crop = (h, w)
        out, self._indices = maxpool_forward(x, self.window, self.window)
        return out

    def backward(self, grad_out: Tensor) -> Tensor:
        grad_x = maxpool_backward(self._indices, grad_out)
        h, w = self._crop
        return np.ascontiguousarray(grad_x[..., :h, :w])
