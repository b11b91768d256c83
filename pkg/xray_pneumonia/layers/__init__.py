"""
Network building blocks with hand-derived backward passes.
"""

from .base import Layer, LayerRegistry, LAYER_REGISTRY, register_layer
from .init import glorot_uniform
from .conv import Conv2dLayer, conv2d_forward, conv2d_backward
from .pooling import MaxPool2dLayer, PoolIndices, maxpool_forward, maxpool_backward
from .activations import (
    ActivationLayer,
    SoftmaxLayer,
    activation_apply,
    activation_grad,
    sigmoid,
    softmax,
    softmax_backward
)
from .dense import DenseLayer, dense_forward, dense_backward
from .dropout import DropoutLayer, dropout_forward, dropout_backward
from .batchnorm import BatchNormLayer, batchnorm_forward, batchnorm_backward
from .residual import ResidualBlock, residual_forward, residual_backward
from .reshape import FlattenLayer, flatten, unflatten
from .stack import LayerStack

__all__ = [
    "Layer",
    "LayerRegistry",
    "LAYER_REGISTRY",
    "register_layer",
    "glorot_uniform",
    "Conv2dLayer",
    "conv2d_forward",
    "conv2d_backward",
    "MaxPool2dLayer",
    "PoolIndices",
    "maxpool_forward",
    "maxpool_backward",
    "ActivationLayer",
    "SoftmaxLayer",
    "activation_apply",
    "activation_grad",
    "sigmoid",
    "softmax",
    "softmax_backward",
    "DenseLayer",
    "dense_forward",
    "dense_backward",
    "DropoutLayer",
    "dropout_forward",
    "dropout_backward",
    "BatchNormLayer",
    "batchnorm_forward",
    "batchnorm_backward",
    "ResidualBlock",
    "residual_forward",
    "residual_backward",
    "FlattenLayer",
    "flatten",
    "unflatten",
    "LayerStack"
]
