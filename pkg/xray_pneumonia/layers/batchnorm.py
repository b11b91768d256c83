"""
Batch normalization over features (N×F input) or channels (N×C×H×W input).

Train mode normalises with the biased batch variance and folds the unbiased
variance into the running statistics; eval mode uses the running statistics.
"""

from typing import Optional, Tuple

import numpy as np

from ..errors import ParameterError, ShapeError
from ..models.enums import LayerMode
from ..tensor_core import Rng, Tensor
from .base import Layer, register_layer


@register_layer
class BatchNormLayer(Layer):
    kind = "batchnorm"

    def __init__(self, num_features: int, eps: float = 1e-5, momentum: float = 0.1, name: str = "bn"):
        super().__init__(name)
        if num_features <= 0:
            raise ParameterError(f"num_features must be positive, got {num_features}")
        if not eps > 0:
            raise ParameterError(f"batch norm epsilon must be positive, got {eps}")
        if not 0.0 < momentum < 1.0:
            raise ParameterError(f"batch norm momentum must be in (0, 1), got {momentum}")
        self.num_features = num_features
        self.eps = float(eps)
        self.momentum = float(momentum)
        self.params = {"gamma": np.ones(num_features), "beta": np.zeros(num_features)}
        self.buffers = {"running_mean": np.zeros(num_features), "running_var": np.ones(num_features)}
        self._input: Optional[Tensor] = None

    def config(self):
        return {"num_features": self.num_features, "eps": self.eps, "momentum": self.momentum}

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        self._input = np.asarray(x, dtype=np.float64)
        return batchnorm_forward(self, self._input)

    def backward(self, grad_out: Tensor) -> Tensor:
        grad_x, grad_gamma, grad_beta = batchnorm_backward(self, self._input, grad_out)
        self.grads = {"gamma": grad_gamma, "beta": grad_beta}
        return grad_x


def _axes(layer: BatchNormLayer, x: Tensor) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Reduction axes and the broadcast shape of per-feature vectors."""
    if x.ndim == 2 and x.shape[1] == layer.num_features:
        return (0,), (1, -1)
    if x.ndim == 4 and x.shape[1] == layer.num_features:
        return (0, 2, 3), (1, -1, 1, 1)
    raise ShapeError.mismatch(
        f"{layer.name}: expected N×{layer.num_features} or N×{layer.num_features}×H×W input", x.shape
    )


def _statistics(layer: BatchNormLayer, x: Tensor, mode: LayerMode):
    axes, view = _axes(layer, x)
    if mode == LayerMode.TRAIN:
        count = x.size // layer.num_features
        if count < 2:
            raise ParameterError(
                f"{layer.name}: train-mode batch norm needs at least 2 values per feature, got {count}"
            )
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
    else:
        mean = layer.buffers["running_mean"]
        var = layer.buffers["running_var"]
    return axes, view, mean, var


def batchnorm_forward(
    layer: BatchNormLayer,
    x: Tensor,
    mode: Optional[LayerMode] = None,
    update_stats: bool = True
) -> Tensor:
    """
    γ·x̂ + β with x̂ = (x − μ) / sqrt(σ² + ε).

    Raises:
        ParameterError: train mode with fewer than 2 values per feature
            (N for N×F input, N·H·W for N×C×H×W input)
        ShapeError: feature axis does not match num_features
    """
    mode = layer.mode if mode is None else mode
    x = np.asarray(x, dtype=np.float64)
    axes, view, mean, var = _statistics(layer, x, mode)
    x_hat = (x - mean.reshape(view)) / np.sqrt(var.reshape(view) + layer.eps)

    if mode == LayerMode.TRAIN and update_stats:
        count = x.size // layer.num_features
        unbiased = var * count / (count - 1)
        m = layer.momentum
        # in place: composite layers share these arrays
        layer.buffers["running_mean"][...] = (1.0 - m) * layer.buffers["running_mean"] + m * mean
        layer.buffers["running_var"][...] = (1.0 - m) * layer.buffers["running_var"] + m * unbiased

    return layer.params["gamma"].reshape(view) * x_hat + layer.params["beta"].reshape(view)


def batchnorm_backward(
    layer: BatchNormLayer,
    x: Tensor,
    grad_out: Tensor,
    mode: Optional[LayerMode] = None
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Gradients with respect to x, γ and β. Running statistics are not touched.
    """
    mode = layer.mode if mode is None else mode
    x = np.asarray(x, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != x.shape:
        raise ShapeError.mismatch(f"{layer.name}: grad_out does not match input", grad_out.shape, x.shape)

    axes, view, mean, var = _statistics(layer, x, mode)
    inv_std = 1.0 / np.sqrt(var + layer.eps)
    x_hat = (x - mean.reshape(view)) * inv_std.reshape(view)

    grad_gamma = (grad_out * x_hat).sum(axis=axes)
    grad_beta = grad_out.sum(axis=axes)
    grad_x_hat = grad_out * layer.params["gamma"].reshape(view)

    if mode == LayerMode.EVAL:
        return grad_x_hat * inv_std.reshape(view), grad_gamma, grad_beta

    count = x.size // layer.num_features
    sum_g = grad_x_hat.sum(axis=axes).reshape(view)
    sum_gx = (grad_x_hat * x_hat).sum(axis=axes).reshape(view)
    grad_x = (inv_std.reshape(view) / count) * (count * grad_x_hat - sum_g - x_hat * sum_gx)
    return grad_x, grad_gamma, grad_beta
