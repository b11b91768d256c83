"""
Image preprocessing: the 8-bit Image type, the netpbm codec and the
brightness, contrast and color-expansion transforms.
"""

from .image import Image
from .codec import decode_netpbm, encode_pgm, encode_ppm, read_image, write_image, write_ppm, SUPPORTED_SUFFIXES
from .transforms import (
    adjust_brightness,
    adjust_contrast,
    compute_channel_averages,
    expand_color_scheme,
    pipeline_apply,
    to_tensor,
    images_to_batch
)

__all__ = [
    "Image",
    "decode_netpbm",
    "encode_pgm",
    "encode_ppm",
    "read_image",
    "write_image",
    "write_ppm",
    "SUPPORTED_SUFFIXES",
    "adjust_brightness",
    "adjust_contrast",
    "compute_channel_averages",
    "expand_color_scheme",
    "pipeline_apply",
    "to_tensor",
    "images_to_batch"
]
