"""
Data models for the pneumonia classification toolkit.

This module contains the validated records used throughout the system:
configuration, synthetic corpus specification, manifest rows, metrics and
report rows.
"""

from .enums import (
    PreprocessMode,
    Architecture,
    HeadKind,
    ActivationKind,
    LayerMode,
    RunStatus
)

from .core import (
    PreprocessConfig,
    ChannelAverages,
    TrainConfig,
    SyntheticSpec,
    ManifestRow
)

from .metrics import (
    Metrics,
    EpochRecord,
    ExperimentRow
)

__all__ = [
    "PreprocessMode",
    "Architecture",
    "HeadKind",
    "ActivationKind",
    "LayerMode",
    "RunStatus",
    "PreprocessConfig",
    "ChannelAverages",
    "TrainConfig",
    "SyntheticSpec",
    "ManifestRow",
    "Metrics",
    "EpochRecord",
    "ExperimentRow"
]
