"""
Synthetic two-class chest-image corpus.

Negatives are a dark field with a smooth vertical gradient and uniform
noise, clipped to [10, 60]. Positives are the same kind of field plus one
to four bright soft-edged elliptical blobs. Images are grayscale, written
as P6 PPM files together with manifest.csv.

All randomness comes from one Rng consumed in a fixed order, so identical
specs give byte-identical corpora.
"""

from pathlib import Path
from typing import List, Union
import logging

import numpy as np

from .manifest import MANIFEST_NAME, write_manifest
from .models.core import ManifestRow, SyntheticSpec
from .preprocess import Image, write_ppm
from .tensor_core import Rng

logger = logging.getLogger("datagen")

PathLike = Union[str, Path]

FIELD_MIN = 10.0
FIELD_MAX = 60.0
BLOB_CENTER_RANGE = (0.2, 0.8)
BLOB_RADIUS_RANGE = (1.0 / 5.0, 1.0 / 3.0)


def _draw(rng: Rng, lo: float, hi: float) -> float:
    if lo == hi:
        return float(lo)
    return float(rng.uniform((), lo, hi))


def draw_labels(spec: SyntheticSpec, rng: Rng) -> np.ndarray:
    """Exactly spec.n_positive ones, shuffled."""
    labels = np.zeros(spec.n_images, dtype=np.int64)
    labels[: spec.n_positive] = 1
    return labels[rng.permutation(spec.n_images)]


def render_field(spec: SyntheticSpec, rng: Rng) -> np.ndarray:
    """Vertical gradient plus noise, as float64 channel values."""
    size = spec.image_size
    top = _draw(rng, spec.background_top_min, spec.background_top_max)
    bottom = _draw(rng, spec.background_bottom_min, spec.background_bottom_max)
    column = top + (bottom - top) * np.arange(size) / (size - 1)
    field = np.repeat(column[:, None], size, axis=1)
    if spec.noise_amplitude > 0:
        field = field + rng.uniform((size, size), -spec.noise_amplitude, spec.noise_amplitude)
    return np.clip(field, FIELD_MIN, FIELD_MAX)


def render_blobs(spec: SyntheticSpec, rng: Rng) -> np.ndarray:
    """Sum of soft elliptical blobs with quadratic radial falloff max(0, 1 − r²)."""
    size = spec.image_size
    count = int(rng.integers(spec.blob_count_min, spec.blob_count_max + 1))
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    total = np.zeros((size, size))
    for _ in range(count):
        cy = _draw(rng, BLOB_CENTER_RANGE[0] * size, BLOB_CENTER_RANGE[1] * size)
        cx = _draw(rng, BLOB_CENTER_RANGE[0] * size, BLOB_CENTER_RANGE[1] * size)
        ry = _draw(rng, BLOB_RADIUS_RANGE[0] * size, BLOB_RADIUS_RANGE[1] * size)
        rx = _draw(rng, BLOB_RADIUS_RANGE[0] * size, BLOB_RADIUS_RANGE[1] * size)
        intensity = _draw(rng, spec.blob_intensity_min, spec.blob_intensity_max)
        r2 = ((rows - cy) / ry) ** 2 + ((cols - cx) / rx) ** 2
        total += intensity * np.maximum(0.0, 1.0 - r2)
    return total


def render_image(spec: SyntheticSpec, label: int, rng: Rng) -> Image:
    values = render_field(spec, rng)
    if label:
        values = values + render_blobs(spec, rng)
    gray = np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)
    return Image.from_gray(gray)


def generate(spec: SyntheticSpec, out_dir: PathLike) -> List[ManifestRow]:
    """
    Write the corpus and its manifest.

    Args:
        spec: Corpus parameters
        out_dir: Target directory, created if missing

    Returns:
        Manifest rows in index order

    Raises:
        OSError: the directory or a file cannot be written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = Rng(spec.seed)
    labels = draw_labels(spec, rng)

    rows: List[ManifestRow] = []
    for index, label in enumerate(labels):
        name = f"img_{index}.ppm"
        write_ppm(out_dir / name, render_image(spec, int(label), rng))
        rows.append(ManifestRow(path=name, label=int(label)))

    write_manifest(out_dir / MANIFEST_NAME, rows)
    logger.info(
        f"generated {spec.n_images} images ({spec.n_positive} positive) "
        f"of {spec.image_size}x{spec.image_size} in {out_dir}"
    )
    return rows
