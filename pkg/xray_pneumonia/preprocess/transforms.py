"""
Image enhancement transforms.

All transforms are pure: they return new images and leave their inputs
untouched. Arithmetic is done in float64, rounded half away from zero and
clamped to [0, 255].
"""

from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import ParameterError
from ..models.core import ChannelAverages, PreprocessConfig
from ..models.enums import PreprocessMode
from ..tensor_core import Tensor
from .image import Image


def _round_clamp(values: np.ndarray) -> np.ndarray:
    rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def adjust_brightness(img: Image, delta: float) -> Image:
    """Add a constant to every R, G and B value."""
    return Image(_round_clamp(img.pixels.astype(np.float64) + float(delta)))


def adjust_contrast(img: Image, alpha: float, beta: float) -> Image:
    """
    Linear contrast stretch g = alpha * f + beta per channel value.

    Raises:
        ParameterError: alpha <= 0
    """
    if not alpha > 0:
        raise ParameterError(f"contrast gain alpha must be positive, got {alpha}")
    return Image(_round_clamp(float(alpha) * img.pixels.astype(np.float64) + float(beta)))


def compute_channel_averages(imgs: Iterable[Image]) -> ChannelAverages:
    """
    Mean R, G and B over every pixel of every image.

    Raises:
        ParameterError: empty sequence
    """
    totals = np.zeros(3, dtype=np.float64)
    count = 0
    for img in imgs:
        totals += img.pixels.reshape(-1, 3).sum(axis=0, dtype=np.float64)
        count += img.width * img.height
    if count == 0:
        raise ParameterError("channel averages need at least one image")
    r, g, b = (totals / count).tolist()
    return ChannelAverages(r_mean=r, g_mean=g, b_mean=b)


def expand_color_scheme(img: Image, avgs: ChannelAverages, denom: float) -> Image:
    """
    Scale each channel by its dataset average divided by `denom`.

    Raises:
        ParameterError: denom <= 0
    """
    if not denom > 0:
        raise ParameterError(f"expansion denominator must be positive, got {denom}")
    scale = avgs.as_array() / float(denom)
    return Image(_round_clamp(img.pixels.astype(np.float64) * scale))


def pipeline_apply(
    img: Image,
    cfg: PreprocessConfig,
    mode,
    averages: Optional[ChannelAverages] = None
) -> Image:
    """
    Apply one enhancement pipeline.

    contrast+light always runs contrast first, then brightness; full runs
    expansion, contrast, brightness.

    Raises:
        ParameterError: unknown mode, or a mode needing averages without them
    """
    try:
        mode = PreprocessMode.parse(mode)
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc

    if mode.needs_averages and averages is None:
        raise ParameterError(f"mode {mode.value!r} needs channel averages")

    if mode == PreprocessMode.RAW:
        return img
    if mode == PreprocessMode.EXPANDED:
        return expand_color_scheme(img, averages, cfg.expansion_denominator)
    if mode == PreprocessMode.CONTRAST:
        return adjust_contrast(img, cfg.alpha, cfg.beta)
    if mode == PreprocessMode.CONTRAST_LIGHT:
        return adjust_brightness(adjust_contrast(img, cfg.alpha, cfg.beta), cfg.brightness_delta)
    if mode == PreprocessMode.LIGHT:
        return adjust_brightness(img, cfg.brightness_delta)
    # FULL
    expanded = expand_color_scheme(img, averages, cfg.expansion_denominator)
    return adjust_brightness(adjust_contrast(expanded, cfg.alpha, cfg.beta), cfg.brightness_delta)


def to_tensor(img: Image, target_size: int) -> Tensor:
    """
    Nearest-neighbour resize to target×target, scale to [0, 1], channels first.

    Destination index d samples source index floor(d * source / target), so a
    2×2 → 1×1 resize keeps the top-left pixel.
    """
    if target_size <= 0:
        raise ParameterError(f"target size must be positive, got {target_size}")
    rows = (np.arange(target_size) * img.height) // target_size
    cols = (np.arange(target_size) * img.width) // target_size
    resized = img.pixels[rows][:, cols]
    return np.ascontiguousarray(resized.transpose(2, 0, 1), dtype=np.float64) / 255.0


def images_to_batch(imgs: Sequence[Image], target_size: int) -> Tensor:
    """Stack to_tensor outputs into an N×3×S×S batch."""
    if not imgs:
        return np.zeros((0, 3, target_size, target_size), dtype=np.float64)
    return np.stack([to_tensor(img, target_size) for img in imgs])
