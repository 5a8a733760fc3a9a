"""Orthonormal 8x8 DCT-II / DCT-III pair.

The basis matrix is built once from the cosine formula with scale factors
sqrt(1/8) for the DC row and sqrt(2/8) for the others, so the transform
preserves energy exactly up to floating rounding.
"""

import numpy as np
from numpy.typing import NDArray

from dsrkit.errors import DimensionError

BLOCK = 8


def dct_basis(n: int = BLOCK) -> NDArray[np.float64]:
    """Return the n-point orthonormal DCT-II matrix (rows are basis vectors).

    Example:
        >>> d = dct_basis()
        >>> bool(np.allclose(d @ d.T, np.eye(8)))
        True
    """
    k = np.arange(n, dtype=np.float64)[:, None]
    i = np.arange(n, dtype=np.float64)[None, :]
    basis = np.cos(np.pi * (2.0 * i + 1.0) * k / (2.0 * n))
    scale = np.full((n, 1), np.sqrt(2.0 / n))
    scale[0, 0] = np.sqrt(1.0 / n)
    return scale * basis


_D = dct_basis()
_DT = _D.T.copy()


def _check_block(block: NDArray[np.float64]) -> None:
    """Require a finite array with trailing shape (8, 8)."""
    if block.ndim < 2 or block.shape[-2:] != (BLOCK, BLOCK):
        raise DimensionError(f"expected 8x8 block(s), got shape {block.shape}")
    if not np.all(np.isfinite(block)):
        raise ValueError("block contains non-finite entries")


def dct2_block(block: NDArray[np.float64]) -> NDArray[np.float64]:
    """Forward 2D DCT-II of one 8x8 block, or a stack of blocks (..., 8, 8).

    Raises:
        DimensionError: If the trailing shape is not 8x8
    """
    block = np.asarray(block, dtype=np.float64)
    _check_block(block)
    return _D @ block @ _DT


def idct2_block(coefficients: NDArray[np.float64]) -> NDArray[np.float64]:
    """Inverse of :func:`dct2_block` (2D DCT-III)."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    _check_block(coefficients)
    return _DT @ coefficients @ _D
