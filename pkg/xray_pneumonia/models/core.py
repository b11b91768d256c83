"""
Core data models for the pneumonia classification toolkit.

Contains the validated configuration records shared by preprocessing,
training, synthetic data generation and the command-line harness.
"""

import math
from typing import Any, Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import Architecture, HeadKind, PreprocessMode


class PreprocessConfig(BaseModel):
    """Parameters of the three image enhancement techniques."""
    alpha: float = Field(default=1.5, gt=0, description="contrast gain")
    beta: float = Field(default=0.0, description="contrast offset, channel units")
    brightness_delta: float = Field(default=40.0, description="brightness increment, channel units")
    expansion_denominator: float = Field(default=128.0, gt=0, description="color expansion divisor, channel units")

    model_config = ConfigDict(extra="forbid", frozen=True)


class ChannelAverages(BaseModel):
    """Mean R, G and B values over a set of images."""
    r_mean: float = Field(..., ge=0, le=255)
    g_mean: float = Field(..., ge=0, le=255)
    b_mean: float = Field(..., ge=0, le=255)

    model_config = ConfigDict(extra="forbid", frozen=True)

    def as_array(self) -> np.ndarray:
        return np.array([self.r_mean, self.g_mean, self.b_mean], dtype=np.float64)


def _split_ints(value: Any) -> Any:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        return tuple(parts)
    return value


class TrainConfig(BaseModel):
    """
    Hyperparameters of one training run.

    Defaults reproduce the published setup (120 epochs, batch size 40,
    learning rate 0.001, dropout 0.4, kernel sizes 3 and 4); everything the
    method leaves open is an explicit field here.
    """
    epochs: int = Field(default=120, gt=0)
    batch_size: int = Field(default=40, gt=0)
    learning_rate: float = Field(default=0.001, gt=0)
    dropout_rate: float = Field(default=0.4, ge=0, lt=1)
    arch: Architecture = Architecture.CNN
    head: HeadKind = HeadKind.SIGMOID
    preprocess_mode: PreprocessMode = PreprocessMode.RAW
    image_size: int = Field(default=64, gt=0)
    seed: int = Field(default=42, ge=0, le=2**64 - 1)
    threshold: float = Field(default=0.5, gt=0, lt=1)
    test_fraction: float = Field(default=0.25, ge=0, lt=1)

    conv_filters: Tuple[int, int, int] = (16, 32, 64)
    kernel_sizes: Tuple[int, int, int] = (3, 3, 4)
    hidden_units: int = Field(default=64, gt=0)
    bn_epsilon: float = Field(default=1e-5, gt=0)
    bn_momentum: float = Field(default=0.1, gt=0, lt=1)

    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_epsilon: float = Field(default=1e-8, gt=0)

    alpha: float = Field(default=1.5, gt=0)
    beta: float = 0.0
    brightness_delta: float = 40.0
    expansion_denominator: float = Field(default=128.0, gt=0)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("preprocess_mode", mode="before")
    @classmethod
    def parse_mode(cls, v):
        """Accept contrast-light / contrast_light spellings."""
        return PreprocessMode.parse(v)

    @field_validator("conv_filters", "kernel_sizes", mode="before")
    @classmethod
    def parse_int_triple(cls, v):
        """Accept comma separated strings from config files."""
        return _split_ints(v)

    @field_validator("conv_filters", "kernel_sizes")
    @classmethod
    def validate_positive(cls, v):
        if any(item <= 0 for item in v):
            raise ValueError("all entries must be positive")
        return v

    def preprocess_config(self) -> PreprocessConfig:
        """Enhancement parameters carried by this run."""
        return PreprocessConfig(
            alpha=self.alpha,
            beta=self.beta,
            brightness_delta=self.brightness_delta,
            expansion_denominator=self.expansion_denominator
        )

    def with_overrides(self, **updates: Any) -> "TrainConfig":
        """Return a validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(updates)
        return TrainConfig.model_validate(data)

    def echo(self) -> Dict[str, Any]:
        """JSON-safe field dump used by checkpoints and reports."""
        return self.model_dump(mode="json")


class SyntheticSpec(BaseModel):
    """Parameters of the synthetic two-class chest-image corpus."""
    n_images: int = Field(default=200, ge=2)
    image_size: int = Field(default=32, ge=8)
    positive_fraction: float = Field(default=0.5, gt=0, lt=1)
    blob_count_min: int = Field(default=1, ge=1)
    blob_count_max: int = Field(default=4, ge=1)
    blob_intensity_min: float = Field(default=140.0, ge=0, le=255)
    blob_intensity_max: float = Field(default=220.0, ge=0, le=255)
    background_top_min: float = Field(default=15.0, ge=0, le=255)
    background_top_max: float = Field(default=25.0, ge=0, le=255)
    background_bottom_min: float = Field(default=35.0, ge=0, le=255)
    background_bottom_max: float = Field(default=50.0, ge=0, le=255)
    noise_amplitude: float = Field(default=8.0, ge=0)
    seed: int = Field(default=7, ge=0, le=2**64 - 1)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def validate_ranges(self):
        """Every (min, max) pair must be ordered."""
        pairs = [
            ("blob_count", self.blob_count_min, self.blob_count_max),
            ("blob_intensity", self.blob_intensity_min, self.blob_intensity_max),
            ("background_top", self.background_top_min, self.background_top_max),
            ("background_bottom", self.background_bottom_min, self.background_bottom_max),
        ]
        for name, low, high in pairs:
            if low > high:
                raise ValueError(f"{name} range is empty: {low} > {high}")
        return self

    @property
    def n_positive(self) -> int:
        """Number of positive images, rounded half up."""
        return int(math.floor(self.n_images * self.positive_fraction + 0.5))


class ManifestRow(BaseModel):
    """One labelled image reference."""
    path: str = Field(..., min_length=1)
    label: int = Field(..., ge=0, le=1)

    model_config = ConfigDict(extra="forbid", frozen=True)
