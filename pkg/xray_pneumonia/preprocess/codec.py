"""
Binary netpbm codec.

Reads P6 (RGB) and P5 (grayscale, replicated to three channels) with
maxval 255. Writes P6, or P5 for a .pgm target whose channels are equal. No color management, no gamma: bytes in, bytes out.
"""

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..errors import ImageDecodeError, ShapeError
from .image import Image

logger = logging.getLogger("codec")

PathLike = Union[str, Path]

_WHITESPACE = b" \t\n\r\v\f"
SUPPORTED_SUFFIXES = (".ppm", ".pgm")
GRAY_SUFFIX = ".pgm"


def _read_header(data: bytes, source: str) -> Tuple[bytes, int, int, int, int]:
    """Parse magic, width, height, maxval; return them with the raster offset."""
    if len(data) < 2 or data[:2] not in (b"P5", b"P6"):
        raise ImageDecodeError(source, "not a binary PPM/PGM file (expected P5 or P6 magic)")
    magic = data[:2]

    values = []
    pos = 2
    while len(values) < 3:
        # skip whitespace and comments between header tokens
        while pos < len(data) and (data[pos:pos + 1] in _WHITESPACE or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                end = data.find(b"\n", pos)
                pos = len(data) if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ImageDecodeError(source, "truncated or malformed header")
        values.append(int(data[start:pos]))

    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise ImageDecodeError(source, "missing whitespace after maxval")
    width, height, maxval = values
    return magic, width, height, maxval, pos + 1


def decode_netpbm(data: bytes, source: str = "<bytes>") -> Image:
    """
    Decode a P6 or P5 byte string.

    Args:
        data: File contents
        source: Name used in error messages

    Returns:
        Three-channel Image

    Raises:
        ImageDecodeError: bad magic, header, maxval or short raster
    """
    magic, width, height, maxval, offset = _read_header(data, source)
    if width <= 0 or height <= 0:
        raise ImageDecodeError(source, f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise ImageDecodeError(source, f"unsupported maxval {maxval} (only 255)")

    channels = 3 if magic == b"P6" else 1
    expected = width * height * channels
    raster = data[offset:offset + expected]
    if len(raster) < expected:
        raise ImageDecodeError(source, f"raster has {len(raster)} bytes, expected {expected}")
    if len(data) - offset > expected:
        logger.debug(f"{source}: ignoring {len(data) - offset - expected} trailing bytes")

    values = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return Image.from_gray(values.reshape(height, width))
    return Image(values.reshape(height, width, 3))


def encode_ppm(img: Image) -> bytes:
    """Encode as binary P6 with maxval 255."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.tobytes()


def encode_pgm(img: Image) -> bytes:
    """
    Encode as binary P5 with maxval 255.

    Raises:
        ShapeError: the channels differ
    """
    if not img.is_gray:
        raise ShapeError.mismatch("P5 needs an image with identical R, G and B channels", img.pixels.shape)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels[:, :, 0].tobytes(order="C")


def read_image(path: PathLike) -> Image:
    """Read a PPM or PGM file from disk."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageDecodeError(str(path), f"cannot read file: {exc.strerror}") from exc
    return decode_netpbm(data, str(path))


def write_ppm(path: PathLike, img: Image) -> None:
    """Write an image as binary P6."""
    path = Path(path)
    path.write_bytes(encode_ppm(img))


def write_image(path: PathLike, img: Image) -> None:
    """
    Write under the exact name given. A .pgm name gets P5 while the image is
    gray; a colored image is written as P6 whatever the suffix.
    """
    path = Path(path)
    if path.suffix.lower() == GRAY_SUFFIX:
        if img.is_gray:
            path.write_bytes(encode_pgm(img))
            return
        logger.warning(f"{path.name}: enhanced image is not gray, writing P6 content")
    path.write_bytes(encode_ppm(img))
