"""Vector helpers and image quality metrics."""

import math

import numpy as np
from numpy.typing import NDArray

from dsrkit.errors import DegenerateDirectionError, DimensionError

PSNR_CAP = 100.0
UNIT_TOL = 1e-9
DEGENERATE_TOL = 1e-12


def l2_norm(v: NDArray[np.float64]) -> float:
    """Euclidean norm of a flattened array."""
    flat = np.ravel(v)
    return float(math.sqrt(math.fsum(flat * flat)))


def linf_norm(v: NDArray[np.float64]) -> float:
    """Max-abs norm of a flattened array."""
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def normalize(v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Return ``v / ||v||``.

    Raises:
        DegenerateDirectionError: If the norm is below 1e-12
    """
    norm = l2_norm(v)
    if norm < DEGENERATE_TOL:
        raise DegenerateDirectionError(f"cannot normalize vector of norm {norm:.3e}")
    return np.asarray(v, dtype=np.float64) / norm


def orthogonal_complement(
    u: NDArray[np.float64], candidate: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Gram-Schmidt: unit vector along ``candidate`` with the ``u`` component removed.

    Projection is applied twice so that ``|u . v|`` stays at rounding level
    even when the candidate is nearly parallel to ``u``.

    Args:
        u: Unit reference vector
        candidate: Vector to orthogonalize, same shape as ``u``

    Returns:
        Unit vector orthogonal to ``u``

    Raises:
        DimensionError: If shapes differ
        ValueError: If ``u`` is not unit length within 1e-9
        DegenerateDirectionError: If nothing is left after projection

    Example:
        >>> v = orthogonal_complement(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        >>> v.tolist()
        [0.0, 1.0]
    """
    u = np.asarray(u, dtype=np.float64)
    candidate = np.asarray(candidate, dtype=np.float64)
    if u.shape != candidate.shape:
        raise DimensionError(f"shape mismatch: {u.shape} vs {candidate.shape}")
    if abs(l2_norm(u) - 1.0) > UNIT_TOL:
        raise ValueError("reference direction must have unit norm")

    flat_u = u.ravel()
    v = candidate.ravel().copy()
    for _ in range(2):
        v -= float(flat_u @ v) * flat_u
    norm = l2_norm(v)
    if norm < DEGENERATE_TOL:
        raise DegenerateDirectionError(
            f"candidate is parallel to the reference direction (residual {norm:.3e})"
        )
    return (v / norm).reshape(u.shape)


def mse(reference: NDArray[np.float64], test: NDArray[np.float64]) -> float:
    """Mean squared error between two same-shaped arrays."""
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise DimensionError(f"shape mismatch: {reference.shape} vs {test.shape}")
    diff = (reference - test).ravel()
    return math.fsum(diff * diff) / diff.size


def psnr(reference: NDArray[np.float64], test: NDArray[np.float64]) -> float:
    """Peak signal-to-noise ratio in dB for images with peak value 1.

    Identical images (and anything closer than the cap) report 100.0 dB.

    Raises:
        DimensionError: If the images have different shapes

    Example:
        >>> a = np.zeros((4, 4))
        >>> round(psnr(a, a + 0.1), 6)
        20.0
    """
    error = mse(reference, test)
    if error == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(1.0 / error))
