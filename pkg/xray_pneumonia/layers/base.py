"""
Base layer class and the layer type registry.

Every network building block derives from Layer. Layers own their
parameters, cache what they need from forward() for backward(), and can
describe themselves for checkpoint serialization.
"""

from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, Optional, Type
import logging

import numpy as np

from ..errors import CheckpointError
from ..models.enums import LayerMode
from ..tensor_core import Rng, Tensor


class Layer(ABC):
    """
    Abstract base class for all network layers.

    Subclasses set `kind` (the registry tag written to checkpoints) and
    implement forward/backward plus descriptor round-tripping.
    """

    kind: ClassVar[str] = ""

    def __init__(self, name: str):
        self.name = name
        self.mode = LayerMode.EVAL
        self.params: Dict[str, Tensor] = {}
        self.grads: Dict[str, Tensor] = {}
        self.buffers: Dict[str, Tensor] = {}
        self.logger = logging.getLogger(f"layer.{name}")

    @abstractmethod
    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        """
        Compute the layer output and cache what backward needs.

        Args:
            x: Batched input
            rng: Random stream, consumed only by train-mode dropout

        Returns:
            Batched output
        """

    @abstractmethod
    def backward(self, grad_out: Tensor) -> Tensor:
        """
        Propagate the loss gradient through the last forward call.

        Fills `self.grads` for every parameter and returns the gradient
        with respect to the layer input.
        """

    def config(self) -> Dict[str, Any]:
        """Constructor arguments needed to rebuild this layer."""
        return {}

    def set_mode(self, mode: LayerMode) -> None:
        self.mode = mode

    def describe(self) -> Dict[str, Any]:
        """Descriptor written into checkpoints."""
        return {
            "type": self.kind,
            "name": self.name,
            "config": self.config(),
            "params": {key: list(value.shape) for key, value in self.params.items()},
            "buffers": {key: list(value.shape) for key, value in self.buffers.items()}
        }

    @classmethod
    def from_descriptor(cls, descriptor: Dict[str, Any]) -> "Layer":
        """Rebuild an uninitialised layer (zero parameters) from its descriptor."""
        return cls(name=descriptor["name"], **descriptor["config"])

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, {self.config()})"


class LayerRegistry:
    """
    Maps checkpoint type tags to layer classes.

    Responsible for:
    - Layer class registration
    - Descriptor based reconstruction
    """

    def __init__(self):
        self.layer_types: Dict[str, Type[Layer]] = {}
        self.logger = logging.getLogger("layer_registry")

    def register(self, layer_cls: Type[Layer]) -> Type[Layer]:
        """Register a layer class; usable as a class decorator."""
        if not layer_cls.kind:
            raise ValueError(f"{layer_cls.__name__} has no kind tag")
        self.layer_types[layer_cls.kind] = layer_cls
        return layer_cls

    def get(self, kind: str) -> Optional[Type[Layer]]:
        return self.layer_types.get(kind)

    def build(self, descriptor: Dict[str, Any]) -> Layer:
        """Rebuild a layer from a checkpoint descriptor."""
        kind = descriptor.get("type")
        layer_cls = self.get(kind)
        if layer_cls is None:
            raise CheckpointError(f"unknown layer type in checkpoint: {kind!r}")
        try:
            return layer_cls.from_descriptor(descriptor)
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"invalid descriptor for layer {descriptor.get('name')!r}: {exc}") from exc


LAYER_REGISTRY = LayerRegistry()


def register_layer(layer_cls: Type[Layer]) -> Type[Layer]:
    """Class decorator adding a layer type to the global registry."""
    return LAYER_REGISTRY.register(layer_cls)


def as_batch(x: Tensor, sample_ndim: int) -> "tuple[Tensor, bool]":
    """
    Promote a single sample to a batch of one.

    Returns the batched array and whether the caller should squeeze the
    leading axis of its result.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == sample_ndim:
        return x[None], True
    return x, False
