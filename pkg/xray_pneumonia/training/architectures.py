"""
Network builders for the cnn and resnet families.

cnn:    conv(k0) → BN → relu → conv(k1) → relu → pool → conv(k2) → relu → pool
        → flatten → dense(hidden, relu) → dropout → head
resnet: conv(k0) → BN → tanh → pool → residual(k1) → pool → conv(k2) → tanh
        → flatten → dense(hidden, tanh) → dropout → head

The sigmoid head is dense(1, sigmoid); the softmax head is dense(2) → softmax.
"""

from typing import List
import logging

from ..errors import ParameterError
from ..layers import (
    ActivationLayer,
    BatchNormLayer,
    Conv2dLayer,
    DenseLayer,
    DropoutLayer,
    FlattenLayer,
    Layer,
    LayerStack,
    MaxPool2dLayer,
    ResidualBlock,
    SoftmaxLayer
)
from ..models.core import TrainConfig
from ..models.enums import ActivationKind, Architecture, HeadKind
from ..tensor_core import Rng

logger = logging.getLogger("trainer")

INPUT_CHANNELS = 3


def _ceil_half(size: int) -> int:
    return -(-size // 2)


def feature_sizes(cfg: TrainConfig) -> List[int]:
    """
    Spatial side length after each size-changing stage.

    Raises:
        ParameterError: image_size too small for the kernel sizes
    """
    k0, k1, k2 = cfg.kernel_sizes
    size = cfg.image_size
    if cfg.arch == Architecture.CNN:
        stages = [("conv", k0), ("conv", k1), ("pool", 2), ("conv", k2), ("pool", 2)]
    else:
        stages = [("conv", k0), ("pool", 2), ("residual", k1), ("pool", 2), ("conv", k2)]

    sizes = []
    for kind, k in stages:
        if kind == "conv":
            if size < k:
                raise ParameterError(
                    f"image_size {cfg.image_size} too small for {cfg.arch.value} with kernels {cfg.kernel_sizes}"
                )
            size = size - k + 1
        elif kind == "pool":
            size = _ceil_half(size)
        sizes.append(size)
    return sizes


def _head(cfg: TrainConfig, rng: Rng) -> List[Layer]:
    if cfg.head == HeadKind.SOFTMAX:
        return [
            DenseLayer(cfg.hidden_units, 2, ActivationKind.NONE, rng=rng, name="output"),
            SoftmaxLayer(name="softmax")
        ]
    return [DenseLayer(cfg.hidden_units, 1, ActivationKind.SIGMOID, rng=rng, name="output")]


def build_cnn(cfg: TrainConfig, rng: Rng) -> LayerStack:
    f0, f1, f2 = cfg.conv_filters
    k0, k1, k2 = cfg.kernel_sizes
    flat = f2 * feature_sizes(cfg)[-1] ** 2
    layers = [
        Conv2dLayer(INPUT_CHANNELS, f0, k0, rng=rng, name="conv1"),
        BatchNormLayer(f0, cfg.bn_epsilon, cfg.bn_momentum, name="bn1"),
        ActivationLayer(ActivationKind.RELU, name="relu1"),
        Conv2dLayer(f0, f1, k1, rng=rng, name="conv2"),
        ActivationLayer(ActivationKind.RELU, name="relu2"),
        MaxPool2dLayer(name="pool1"),
        Conv2dLayer(f1, f2, k2, rng=rng, name="conv3"),
        ActivationLayer(ActivationKind.RELU, name="relu3"),
        MaxPool2dLayer(name="pool2"),
        FlattenLayer(name="flatten"),
        DenseLayer(flat, cfg.hidden_units, ActivationKind.RELU, rng=rng, name="hidden"),
        DropoutLayer(cfg.dropout_rate, name="dropout")
    ]
    return LayerStack(layers + _head(cfg, rng), Architecture.CNN, cfg.head, cfg.image_size)


def build_resnet(cfg: TrainConfig, rng: Rng) -> LayerStack:
    f0, f1, f2 = cfg.conv_filters
    k0, k1, k2 = cfg.kernel_sizes
    flat = f2 * feature_sizes(cfg)[-1] ** 2
    layers = [
        Conv2dLayer(INPUT_CHANNELS, f0, k0, rng=rng, name="conv1"),
        BatchNormLayer(f0, cfg.bn_epsilon, cfg.bn_momentum, name="bn1"),
        ActivationLayer(ActivationKind.TANH, name="tanh1"),
        MaxPool2dLayer(name="pool1"),
        ResidualBlock(f0, f1, k1, cfg.bn_epsilon, cfg.bn_momentum, rng=rng, name="residual"),
        MaxPool2dLayer(name="pool2"),
        Conv2dLayer(f1, f2, k2, rng=rng, name="conv2"),
        ActivationLayer(ActivationKind.TANH, name="tanh2"),
        FlattenLayer(name="flatten"),
        DenseLayer(flat, cfg.hidden_units, ActivationKind.TANH, rng=rng, name="hidden"),
        DropoutLayer(cfg.dropout_rate, name="dropout")
    ]
    return LayerStack(layers + _head(cfg, rng), Architecture.RESNET, cfg.head, cfg.image_size)


def build_model(cfg: TrainConfig, rng: Rng) -> LayerStack:
    """
    Build a freshly initialised network for the configured architecture.

    Args:
        cfg: Training configuration (arch, head, filters, kernels, image size)
        rng: Initialisation stream

    Returns:
        Model in eval mode
    """
    builder = build_cnn if cfg.arch == Architecture.CNN else build_resnet
    model = builder(cfg, rng)
    logger.debug(f"built {cfg.arch.value} with {model.parameter_count()} parameters, feature sizes {feature_sizes(cfg)}")
    return model
