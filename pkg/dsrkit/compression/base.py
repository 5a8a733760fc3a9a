"""Compression operator interface and the identity operator."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import NDArray

from dsrkit.errors import DimensionError
from dsrkit.models import Image


class CompressionOperator(ABC):
    """Deterministic, lossy image-to-image transform C.

    Subclasses implement :meth:`compress_batch` on a stack of images with a
    leading batch axis; :meth:`compress` handles a single image through the
    same code path.
    """

    name: str = "operator"
    family: str = "operator"

    @property
    def exact_lipschitz(self) -> float | None:
        """Global Lipschitz constant in L2 when it is known exactly."""
        return None

    @abstractmethod
    def compress_batch(self, xs: NDArray[np.float64]) -> NDArray[np.float64]:
        """Compress every image of a (N, ...) stack."""

    def compress(self, x: Image) -> Image:
        """Compress one image."""
        x = np.asarray(x, dtype=np.float64)
        return self.compress_batch(x[None, ...])[0]

    def __call__(self, x: Image) -> Image:
        return self.compress(x)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class IdentityOperator(CompressionOperator):
    """C(x) = x."""

    name = "identity"
    family = "Identity"

    @property
    def exact_lipschitz(self) -> float | None:
        return 1.0

    def compress_batch(self, xs: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.array(xs, dtype=np.float64, copy=True)


def as_planes(xs: NDArray[np.float64]) -> tuple[NDArray[np.float64], tuple[int, ...]]:
    """View a batch of single-channel images as (N, H, W).

    Returns:
        The (N, H, W) array and the original shape to restore afterwards

    Raises:
        DimensionError: If the images are not single-channel 2D images
    """
    xs = np.asarray(xs, dtype=np.float64)
    shape = xs.shape
    if xs.ndim == 4 and shape[-1] == 1:
        return xs[..., 0], shape
    if xs.ndim != 3:
        raise DimensionError(
            f"codec expects single-channel images (N, H, W[, 1]), got shape {shape}"
        )
    return xs, shape


def pad_to_multiple(planes: NDArray[np.float64], size: int) -> NDArray[np.float64]:
    """Edge-replicate the last two axes up to multiples of ``size``."""
    height, width = planes.shape[-2:]
    pad_h = (-height) % size
    pad_w = (-width) % size
    if pad_h == 0 and pad_w == 0:
        return planes
    return np.pad(planes, ((0, 0), (0, pad_h), (0, pad_w)), mode="edge")


def to_blocks(planes: NDArray[np.float64], size: int) -> NDArray[np.float64]:
    """Split (N, H, W) into (N, H/size, W/size, size, size) tiles."""
    n, height, width = planes.shape
    tiles = planes.reshape(n, height // size, size, width // size, size)
    return tiles.transpose(0, 1, 3, 2, 4)


def from_blocks(tiles: NDArray[np.float64]) -> NDArray[np.float64]:
    """Inverse of :func:`to_blocks`."""
    n, rows, cols, size, _ = tiles.shape
    return tiles.transpose(0, 1, 3, 2, 4).reshape(n, rows * size, cols * size)
