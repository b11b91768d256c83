"""
Enumerations for the pneumonia classification toolkit.

Contains all enum definitions used throughout the system for type safety
and consistent value handling.
"""

from enum import Enum


class PreprocessMode(Enum):
    """Image enhancement pipelines that can be applied before training."""
    RAW = "raw"
    EXPANDED = "expanded"
    CONTRAST = "contrast"
    CONTRAST_LIGHT = "contrast+light"
    LIGHT = "light"
    FULL = "full"

    @classmethod
    def parse(cls, value: "str | PreprocessMode") -> "PreprocessMode":
        """Accept the canonical value plus the shell-friendly spellings."""
        if isinstance(value, cls):
            return value
        normalized = str(value).strip().lower().replace("-", "+").replace("_", "+")
        for mode in cls:
            if mode.value == normalized:
                return mode
        raise ValueError(f"unknown preprocess mode: {value!r}")

    @property
    def needs_averages(self) -> bool:
        return self in (PreprocessMode.EXPANDED, PreprocessMode.FULL)


class Architecture(Enum):
    """Network families."""
    CNN = "cnn"
    RESNET = "resnet"


class HeadKind(Enum):
    """Output head of the network."""
    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"


class ActivationKind(Enum):
    """Elementwise nonlinearities."""
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    NONE = "none"


class LayerMode(Enum):
    """Behaviour switch for dropout and batch normalization."""
    TRAIN = "train"
    EVAL = "eval"


class RunStatus(Enum):
    """Outcome of one ablation experiment row."""
    OK = "ok"
    FAILED = "failed"
