"""PatchSVD compression: rank-r truncation of non-overlapping p x p patches."""

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
from dsrkit.numerics.svd import svd_batch

DEFAULT_PATCH = 8
DEFAULT_RANK = 3


def _check(patch: int, rank: int) -> None:
    """Raise ValueError for a non-positive patch or a rank outside 1..patch."""
    if patch < 1:
        raise ValueError(f"patch size must be >= 1, got {patch}")
    if not 1 <= rank <= patch:
        raise ValueError(f"rank must lie in 1..{patch}, got {rank}")


def truncate_patches(patches: NDArray[np.float64], rank: int) -> NDArray[np.float64]:
    """Best rank-``rank`` approximation of every matrix in a (B, p, p) stack."""
    u, s, v = svd_batch(patches)
    u_r = u[:, :, :rank] * s[:, None, :rank]
    return u_r @ np.swapaxes(v[:, :, :rank], 1, 2)


def patch_svd_compress(x: Image, patch: int = DEFAULT_PATCH, rank: int = DEFAULT_RANK) -> Image:
    """Compress one single-channel image patch by patch.

    Raises:
        ValueError: If patch or rank is invalid
        DimensionError: If the image is not single-channel
    """
    return PatchSvdOperator(patch, rank).compress(x)


class PatchSvdOperator(CompressionOperator):
    """Per-patch truncated SVD."""

    family = "PatchSVD"

    def __init__(self, patch: int = DEFAULT_PATCH, rank: int = DEFAULT_RANK) -> None:
        _check(patch, rank)
        self.patch = int(patch)
        self.rank = int(rank)
        self.name = f"patch_svd(p={self.patch},r={self.rank})"

    def compress_batch(self, xs: NDArray[np.float64]) -> NDArray[np.float64]:
        planes, shape = as_planes(xs)
        height, width = planes.shape[-2:]
        tiles = to_blocks(pad_to_multiple(planes, self.patch), self.patch)
        flat = tiles.reshape(-1, self.patch, self.patch)
        approx = truncate_patches(flat, self.rank).reshape(tiles.shape)
        out = from_blocks(approx)[:, :height, :width]
        return np.clip(out, 0.0, 1.0).reshape(shape)
