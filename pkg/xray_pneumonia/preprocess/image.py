"""8-bit RGB raster."""

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError


@dataclass(frozen=True, eq=False)
class Image:
    """
    Row-major 8-bit image with exactly three channels (R, G, B).

    `pixels` has shape (height, width, 3) and is read-only; transforms
    always return new Image objects.
    """
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ShapeError.mismatch("image pixels must be (height, width, 3)", pixels.shape)
        if pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ShapeError.mismatch("image must have positive width and height", pixels.shape)
        if pixels.dtype != np.uint8 and (pixels.min() < 0 or pixels.max() > 255):
            raise ValueError("channel values must be within [0, 255]")
        pixels = np.array(pixels, dtype=np.uint8, order="C")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_gray(cls, gray: np.ndarray) -> "Image":
        """Replicate a single-channel raster into three identical channels."""
        gray = np.asarray(gray, dtype=np.uint8)
        if gray.ndim != 2:
            raise ShapeError.mismatch("grayscale raster must be (height, width)", gray.shape)
        return cls(np.repeat(gray[:, :, None], 3, axis=2))

    @classmethod
    def filled(cls, width: int, height: int, rgb=(0, 0, 0)) -> "Image":
        pixels = np.empty((height, width, 3), dtype=np.uint8)
        pixels[:, :] = np.asarray(rgb, dtype=np.uint8)
        return cls(pixels)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def is_gray(self) -> bool:
        return bool(np.all(self.pixels[:, :, 0:1] == self.pixels))

    @property
    def channels(self) -> int:
        return 3

    def tobytes(self) -> bytes:
        """Row-major R, G, B byte buffer."""
        return self.pixels.tobytes(order="C")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self) -> str:
        return f"Image(width={self.width}, height={self.height})"
