"""
Manifest ingestion.

A manifest is a CSV file with the header `path,label`; paths are relative
to the manifest's directory and labels are 0 or 1.
"""

import csv
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from .errors import ManifestError
from .models.core import ChannelAverages, ManifestRow, PreprocessConfig
from .models.enums import PreprocessMode
from .preprocess import Image, compute_channel_averages, images_to_batch, pipeline_apply, read_image
from .training.trainer import Dataset

logger = logging.getLogger("cli.manifest")

PathLike = Union[str, Path]

MANIFEST_HEADER = ["path", "label"]
MANIFEST_NAME = "manifest.csv"


def read_manifest(path: PathLike) -> List[ManifestRow]:
    """
    Parse a manifest file.

    Raises:
        ManifestError: missing file, bad header, or malformed row (with line number)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc

    rows: List[ManifestRow] = []
    reader = csv.reader(text.splitlines())
    header_seen = False
    for line_number, record in enumerate(reader, start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        cells = [cell.strip() for cell in record]
        if not header_seen:
            if cells != MANIFEST_HEADER:
                raise ManifestError(f"expected header 'path,label', got {','.join(cells)!r}", line_number)
            header_seen = True
            continue
        if len(cells) != 2:
            raise ManifestError(f"expected 2 columns, got {len(cells)}", line_number)
        if cells[1] not in ("0", "1"):
            raise ManifestError(f"label must be 0 or 1, got {cells[1]!r}", line_number)
        try:
            rows.append(ManifestRow(path=cells[0], label=int(cells[1])))
        except ValidationError as exc:
            raise ManifestError(exc.errors()[0]["msg"], line_number) from exc

    if not header_seen:
        raise ManifestError(f"manifest {path} is empty (no header)")
    return rows


def write_manifest(path: PathLike, rows: Sequence[ManifestRow]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for row in rows:
            writer.writerow([row.path, row.label])


def load_manifest_images(path: PathLike) -> Tuple[List[ManifestRow], List[Image]]:
    """
    Read a manifest and decode every referenced image.

    Raises:
        ManifestError: no rows, or a referenced file does not exist
        ImageDecodeError: a referenced file does not decode
    """
    path = Path(path)
    rows = read_manifest(path)
    if not rows:
        raise ManifestError(f"manifest {path} has no rows")

    base = path.parent
    images: List[Image] = []
    for line_number, row in enumerate(rows, start=2):
        image_path = base / row.path
        if not image_path.is_file():
            raise ManifestError(f"referenced file does not exist: {image_path}", line_number)
        images.append(read_image(image_path))

    logger.info(f"loaded {len(images)} images from {path}")
    return rows, images


def prepare_dataset(
    rows: Sequence[ManifestRow],
    images: Sequence[Image],
    mode: PreprocessMode,
    preprocess: PreprocessConfig,
    image_size: int,
    averages: Optional[ChannelAverages] = None
) -> Tuple[Dataset, Optional[ChannelAverages]]:
    """
    Apply an enhancement pipeline and convert to a training tensor batch.

    Modes needing channel averages compute them over `images` unless given.

    Returns:
        Dataset and the channel averages used (None for modes without them)
    """
    mode = PreprocessMode.parse(mode)
    if mode.needs_averages and averages is None:
        averages = compute_channel_averages(images)
    used = averages if mode.needs_averages else None
    enhanced = [pipeline_apply(img, preprocess, mode, used) for img in images]
    dataset = Dataset(
        x=images_to_batch(enhanced, image_size),
        y=[row.label for row in rows],
        paths=[row.path for row in rows]
    )
    return dataset, used


def load_dataset(
    path: PathLike,
    mode: PreprocessMode,
    preprocess: PreprocessConfig,
    image_size: int,
    averages: Optional[ChannelAverages] = None
) -> Tuple[Dataset, Optional[ChannelAverages]]:
    """load_manifest_images followed by prepare_dataset."""
    rows, images = load_manifest_images(path)
    return prepare_dataset(rows, images, mode, preprocess, image_size, averages)
