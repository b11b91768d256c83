"""
Sequential model container.
"""

from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import logging

from ..errors import ParameterError
from ..models.enums import Architecture, HeadKind, LayerMode
from ..tensor_core import Rng, Tensor
from .base import Layer


class LayerStack:
    """
    Ordered list of layers applied one after another.

    Responsible for:
    - Forward and reverse-order backward passes
    - Switching every layer between train and eval mode
    - Exposing parameters, gradients and buffers under `<layer>.<key>` names
    """

    def __init__(
        self,
        layers: Sequence[Layer],
        arch: Architecture = Architecture.CNN,
        head: HeadKind = HeadKind.SIGMOID,
        image_size: Optional[int] = None
    ):
        names = [layer.name for layer in layers]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ParameterError(f"layer names must be unique, duplicated: {duplicates}")
        self.layers: List[Layer] = list(layers)
        self.arch = Architecture(arch)
        self.head = HeadKind(head)
        self.image_size = image_size
        self.mode = LayerMode.EVAL
        self.logger = logging.getLogger("layer.stack")
        self.set_mode(LayerMode.EVAL)

    def __iter__(self) -> Iterator[Layer]:
        return iter(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, name: str) -> Layer:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    def set_mode(self, mode: LayerMode) -> None:
        self.mode = mode
        for layer in self.layers:
            layer.set_mode(mode)

    def forward(self, x: Tensor, rng: Optional[Rng] = None) -> Tensor:
        for layer in self.layers:
            x = layer.forward(x, rng)
        return x

    def backward(self, grad_out: Tensor) -> Tensor:
        for layer in reversed(self.layers):
            grad_out = layer.backward(grad_out)
        return grad_out

    def _named(self, attr: str) -> List[Tuple[str, Tensor]]:
        return [
            (f"{layer.name}.{key}", value)
            for layer in self.layers
            for key, value in getattr(layer, attr).items()
        ]

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        return self._named("params")

    def named_grads(self) -> Dict[str, Tensor]:
        return dict(self._named("grads"))

    def named_buffers(self) -> List[Tuple[str, Tensor]]:
        return self._named("buffers")

    def parameter_count(self) -> int:
        return sum(int(value.size) for _, value in self.named_parameters())

    def describe(self) -> List[dict]:
        return [layer.describe() for layer in self.layers]

    def __repr__(self) -> str:
        return f"LayerStack(arch={self.arch.value}, head={self.head.value}, layers={[l.name for l in self.layers]})"
