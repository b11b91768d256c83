"""
Residual block: out = tanh(inner(x) + proj(x)).

inner is conv → BN → tanh → conv → BN with "same" padding so the spatial
shape is preserved; proj is a 1×1 convolution when the channel counts
differ and the identity otherwise.
"""

from typing import Any, Dict, Optional

import numpy as np

from ..errors import ParameterError, ShapeError
from ..models.enums import LayerMode
from ..tensor_core import Rng, Tensor
from .base import Layer, as_batch, register_layer
from .batchnorm import BatchNormLayer, batchnorm_backward, batchnorm_forward
from .conv import Conv2dLayer, conv2d_backward, conv2d_forward


@register_layer
class ResidualBlock(Layer):
    """
    Two-convolution residual block with a tanh output.

    Parameters and buffers of the inner layers are exposed through the
    block's own dicts under dotted names (`conv1.kernels`, `bn2.running_var`).
    The arrays are shared, so updates must happen in place.
    """

    kind = "residual"

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 3,
        eps: float = 1e-5,
        momentum: float = 0.1,
        rng: Optional[Rng] = None,
        name: str = "residual"
    ):
        super().__init__(name)
        if kernel_size % 2 == 0:
            raise ParameterError(f"residual kernel size must be odd to preserve shape, got {kernel_size}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.eps = eps
        self.momentum = momentum

        pad = kernel_size // 2
        self.conv1 = Conv2dLayer(in_channels, out_channels, kernel_size, padding=pad, rng=rng, name="conv1")
        self.bn1 = BatchNormLayer(out_channels, eps, momentum, name="bn1")
        self.conv2 = Conv2dLayer(out_channels, out_channels, kernel_size, padding=pad, rng=rng, name="conv2")
        self.bn2 = BatchNormLayer(out_channels, eps, momentum, name="bn2")
        self.proj: Optional[Conv2dLayer] = None
        if in_channels != out_channels:
            self.proj = Conv2dLayer(in_channels, out_channels, 1, rng=rng, name="proj")

        self.params = self._collect("params")
        self.buffers = self._collect("buffers")
        self._cache: Optional[Dict[str, Any]] = None

    @property
    def children(self):
        layers = [self.conv1, self.bn1, self.conv2, self.bn2]
        return layers + ([self.proj] if self.proj is not None else [])

    def _collect(self, attr: str) -> Dict[str, Tensor]:
        return {
            f"{child.name}.{key}": value
            for child in self.children
            for key, value in getattr(child, attr).items()
        }

    def config(self):
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel_size": self.kernel_size,
            "eps": self.eps,
            "momentum": self.momentum
        }

    def set_mode(self, mode: LayerMode) -> None:
        super().set_mode(mode)
        for child in self.children:
            child.set_mode(mode)

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        self._cache = _run(self, x, self.mode, update_stats=True)
        return self._cache["out"]

    def backward(self, grad_out: Tensor) -> Tensor:
        grad_x, self.grads = _backprop(self, self._cache, grad_out)
        return grad_x


def _run(block: ResidualBlock, x: Tensor, mode: LayerMode, update_stats: bool) -> Dict[str, Any]:
    x, single = as_batch(x, 3)
    if x.ndim != 4 or x.shape[1] != block.in_channels:
        raise ShapeError.mismatch(f"{block.name}: expected {block.in_channels} input channels", x.shape)
    a1 = conv2d_forward(block.conv1, x)
    h = np.tanh(batchnorm_forward(block.bn1, a1, mode, update_stats))
    a2 = conv2d_forward(block.conv2, h)
    inner = batchnorm_forward(block.bn2, a2, mode, update_stats)
    skip = x if block.proj is None else conv2d_forward(block.proj, x)
    if inner.shape != skip.shape:
        raise ShapeError.mismatch(f"{block.name}: inner and identity branches differ", inner.shape, skip.shape)
    out = np.tanh(inner + skip)
    return {"x": x, "a1": a1, "h": h, "a2": a2, "out": out[0] if single else out, "tanh_out": out,
            "single": single, "mode": mode}


def _backprop(block: ResidualBlock, cache: Dict[str, Any], grad_out: Tensor):
    grad_out, _ = as_batch(grad_out, 3)
    if grad_out.shape != cache["tanh_out"].shape:
        raise ShapeError.mismatch(f"{block.name}: grad_out does not match output", grad_out.shape, cache["tanh_out"].shape)
    mode = cache["mode"]
    x = cache["x"]
    grads: Dict[str, Tensor] = {}

    grad_sum = grad_out * (1.0 - cache["tanh_out"] ** 2)

    grad_a2, grads["bn2.gamma"], grads["bn2.beta"] = batchnorm_backward(block.bn2, cache["a2"], grad_sum, mode)
    grad_h, grads["conv2.kernels"], grads["conv2.biases"] = conv2d_backward(block.conv2, cache["h"], grad_a2)
    grad_b1 = grad_h * (1.0 - cache["h"] ** 2)
    grad_a1, grads["bn1.gamma"], grads["bn1.beta"] = batchnorm_backward(block.bn1, cache["a1"], grad_b1, mode)
    grad_x, grads["conv1.kernels"], grads["conv1.biases"] = conv2d_backward(block.conv1, x, grad_a1)

    if block.proj is None:
        grad_x = grad_x + grad_sum
    else:
        grad_skip, grads["proj.kernels"], grads["proj.biases"] = conv2d_backward(block.proj, x, grad_sum)
        grad_x = grad_x + grad_skip

    return (grad_x[0] if cache["single"] else grad_x), grads


def residual_forward(block: ResidualBlock, x: Tensor, mode: Optional[LayerMode] = None) -> Tensor:
    """tanh(inner(x) + proj(x)); train mode updates the batch-norm running statistics."""
    return _run(block, x, block.mode if mode is None else mode, update_stats=True)["out"]


def residual_backward(
    block: ResidualBlock,
    x: Tensor,
    grad_out: Tensor,
    mode: Optional[LayerMode] = None
):
    """
    Gradient with respect to x plus a dict of parameter gradients keyed like
    `block.params`. The forward pass is recomputed without touching the
    running statistics.
    """
    cache = _run(block, x, block.mode if mode is None else mode, update_stats=False)
    return _backprop(block, cache, grad_out)
