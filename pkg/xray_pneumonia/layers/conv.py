"""
Stride-1 2-D convolution.

Forward and backward are im2col formulations: sliding_window_view exposes
every k×k patch and tensordot contracts patches against kernels.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ParameterError, ShapeError
from ..tensor_core import Rng, Tensor
from .base import Layer, as_batch, register_layer
from .init import glorot_uniform


@register_layer
class Conv2dLayer(Layer):
    """
    Convolution with `out_channels` kernels of size k×k over `in_channels`.

    Zero padding defaults to 0 (valid convolution, output side H − k + 1).
    Residual blocks use padding k // 2 to preserve spatial size.
    """

    kind = "conv2d"

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        padding: int = 0,
        rng: Optional[Rng] = None,
        name: str = "conv"
    ):
        super().__init__(name)
        if in_channels <= 0 or out_channels <= 0 or kernel_size <= 0:
            raise ParameterError(
                f"conv dimensions must be positive: in={in_channels} out={out_channels} k={kernel_size}"
            )
        if padding < 0:
            raise ParameterError(f"padding must be non-negative, got {padding}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.padding = padding
        self.stride = 1

        shape = (out_channels, in_channels, kernel_size, kernel_size)
        if rng is None:
            kernels = np.zeros(shape)
        else:
            area = kernel_size * kernel_size
            kernels = glorot_uniform(rng, shape, in_channels * area, out_channels * area)
        self.params = {"kernels": kernels, "biases": np.zeros(out_channels)}
        self._input: Optional[Tensor] = None

    @property
    def kernels(self) -> Tensor:
        return self.params["kernels"]

    @property
    def biases(self) -> Tensor:
        return self.params["biases"]

    def output_size(self, size: int) -> int:
        return size + 2 * self.padding - self.kernel_size + 1

    def config(self):
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel_size": self.kernel_size,
            "padding": self.padding
        }

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        self._input = x
        return conv2d_forward(self, x)

    def backward(self, grad_out: Tensor) -> Tensor:
        grad_x, grad_k, grad_b = conv2d_backward(self, self._input, grad_out)
        self.grads = {"kernels": grad_k, "biases": grad_b}
        return grad_x


def _padded(layer: Conv2dLayer, x: Tensor) -> Tensor:
    p = layer.padding
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))


def _check_input(layer: Conv2dLayer, x: Tensor) -> None:
    if x.ndim != 4 or x.shape[1] != layer.in_channels:
        raise ShapeError.mismatch(
            f"{layer.name}: expected input with {layer.in_channels} channels",
            x.shape[1:] if x.ndim == 4 else x.shape
        )
    k = layer.kernel_size
    if x.shape[2] + 2 * layer.padding < k or x.shape[3] + 2 * layer.padding < k:
        raise ShapeError.mismatch(f"{layer.name}: input smaller than kernel", x.shape[1:], (k, k))


def conv2d_forward(layer: Conv2dLayer, x: Tensor) -> Tensor:
    """
    out[o, i, j] = bias[o] + Σ_{c,a,b} kernel[o, c, a, b] · x[c, i + a, j + b].

    Accepts C×H×W or N×C×H×W input.
    """
    x, single = as_batch(x, 3)
    _check_input(layer, x)
    k = layer.kernel_size
    windows = sliding_window_view(_padded(layer, x), (k, k), axis=(2, 3))
    out = np.tensordot(windows, layer.kernels, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + layer.biases[None, :, None, None]
    out = np.ascontiguousarray(out)
    return out[0] if single else out


def conv2d_backward(layer: Conv2dLayer, x: Tensor, grad_out: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Gradients of Σ(out · grad_out) with respect to input, kernels and biases.
    """
    x, single = as_batch(x, 3)
    grad_out, _ = as_batch(grad_out, 3)
    _check_input(layer, x)
    k = layer.kernel_size
    p = layer.padding
    expected = (x.shape[0], layer.out_channels, layer.output_size(x.shape[2]), layer.output_size(x.shape[3]))
    if grad_out.shape != expected:
        raise ShapeError.mismatch(f"{layer.name}: grad_out does not match forward output", grad_out.shape, expected)

    windows = sliding_window_view(_padded(layer, x), (k, k), axis=(2, 3))
    grad_biases = grad_out.sum(axis=(0, 2, 3))
    grad_kernels = np.tensordot(grad_out, windows, axes=([0, 2, 3], [0, 2, 3]))

    # full correlation of grad_out with the flipped kernels
    grad_padded = np.pad(grad_out, ((0, 0), (0, 0), (k - 1, k - 1), (k - 1, k - 1)))
    grad_windows = sliding_window_view(grad_padded, (k, k), axis=(2, 3))
    flipped = layer.kernels[:, :, ::-1, ::-1]
    grad_x = np.tensordot(grad_windows, flipped, axes=([1, 4, 5], [0, 2, 3])).transpose(0, 3, 1, 2)
    if p:
        grad_x = grad_x[:, :, p:-p, p:-p]
    grad_x = np.ascontiguousarray(grad_x)
    return (grad_x[0] if single else grad_x), np.ascontiguousarray(grad_kernels), grad_biases
