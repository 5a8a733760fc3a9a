"""Luminance-only JPEG-style codec (reconstruction only).

8x8 orthonormal DCT of level-shifted 0..255 samples, quantization with the
Annex K luminance table scaled by the libjpeg quality rule, rounding half away
from zero, and dequantized reconstruction back to [0, 1]. Entropy coding is
lossless and is skipped.
"""

import numpy as np
from numpy.typing import NDArray

from dsrkit.compression.base import (
    CompressionOperator,
    as_planes,
    from_blocks,
    pad_to_multiple,
    to_blocks,
)
from dsrkit.models import Image
from dsrkit.numerics.dct import BLOCK, dct2_block, idct2_block

LUMINANCE_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)


def _check_quality(quality: int) -> None:
    """Raise ValueError unless quality is an integer in 1..100."""
    if isinstance(quality, bool) or int(quality) != quality or not 1 <= quality <= 100:
        raise ValueError(f"JPEG quality must be an integer in 1..100, got {quality}")


def quantization_table(quality: int) -> NDArray[np.int64]:
    """Quality-scaled luminance quantization table.

    Example:
        >>> int(quantization_table(50)[0, 0])
        16
        >>> int(quantization_table(100).max())
        1
    """
    _check_quality(quality)
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    return np.clip((LUMINANCE_TABLE * scale + 50) // 100, 1, 255)


def round_half_away(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Round to nearest integer, ties away from zero."""
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def _jpeg_planes(planes: NDArray[np.float64], quality: int) -> NDArray[np.float64]:
    """Quantize and reconstruct a (B, H, W) stack of planes."""
    height, width = planes.shape[-2:]
    table = quantization_table(quality).astype(np.float64)
    padded = pad_to_multiple(planes, BLOCK)
    blocks = to_blocks(padded * 255.0 - 128.0, BLOCK)
    levels = round_half_away(dct2_block(blocks) / table)
    pixels = from_blocks(idct2_block(levels * table))[:, :height, :width]
    return np.clip((pixels + 128.0) / 255.0, 0.0, 1.0)


def jpeg_like_compress(x: Image, quality: int) -> Image:
    """Compress and reconstruct one single-channel image.

    Args:
        x: Image (H, W) or (H, W, 1) with values in [0, 1]
        quality: Quality factor 1..100, lower is lossier

    Returns:
        Reconstruction with the shape of ``x``, values in [0, 1]

    Raises:
        ValueError: If quality is out of range
        DimensionError: If the image is not single-channel
    """
    return JpegOperator(quality).compress(x)


class JpegOperator(CompressionOperator):
    """JPEG-style codec at a fixed quality."""

    family = "JPEG"

    def __init__(self, quality: int) -> None:
        _check_quality(quality)
        self.quality = int(quality)
        self.name = f"jpeg(q={self.quality})"

    def compress_batch(self, xs: NDArray[np.float64]) -> NDArray[np.float64]:
        planes, shape = as_planes(xs)
        return _jpeg_planes(planes, self.quality).reshape(shape)
