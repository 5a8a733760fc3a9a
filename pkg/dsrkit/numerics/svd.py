"""Thin SVD by one-sided (Hestenes) Jacobi rotations.

Columns of the working matrix are orthogonalized pairwise until every pair is
orthogonal to working precision. Pairs are visited in round-robin tournament
order, so each round touches disjoint column pairs and is applied to all of
them at once. A leading batch axis lets many small matrices (image patches)
be decomposed in the same sweep loop.
"""

import logging

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)

MAX_SWEEPS = 80
ORTHOGONALITY_TOL = 1e-15
RANK_TOL = 1e-13


def _round_robin(n: int) -> list[tuple[NDArray[np.intp], NDArray[np.intp]]]:
    """Disjoint pair schedule covering every (i, j), i < j, once per sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        left, right = [], []
        for k in range(size // 2):
            a, b = players[k], players[size - 1 - k]
            if a < 0 or b < 0:
                continue
            left.append(min(a, b))
            right.append(max(a, b))
        rounds.append((np.array(left, dtype=np.intp), np.array(right, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _jacobi_sweeps(
    work: NDArray[np.float64], right: NDArray[np.float64]
) -> int:
    """Rotate columns of ``work`` (and ``right``) in place until orthogonal."""
    n = work.shape[-1]
    if n < 2:
        return 0
    schedule = _round_robin(n)
    for sweep in range(1, MAX_SWEEPS + 1):
        rotated = False
        for lo, hi in schedule:
            wl = work[:, :, lo]
            wh = work[:, :, hi]
            # Gram entries of each column pair, per batch item
            alpha = np.einsum("bmp,bmp->bp", wl, wl)
            beta = np.einsum("bmp,bmp->bp", wh, wh)
            gamma = np.einsum("bmp,bmp->bp", wl, wh)
            active = np.abs(gamma) > ORTHOGONALITY_TOL * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            safe_gamma = np.where(active, gamma, 1.0)
            # smaller root of t^2 + 2 zeta t - 1 = 0 keeps |angle| <= pi/4
            zeta = (beta - alpha) / (2.0 * safe_gamma)
            sign = np.where(zeta >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            # pairs already orthogonal get the identity rotation
            c = np.where(active, c, 1.0)[:, None, :]
            s = np.where(active, s, 0.0)[:, None, :]

            work[:, :, lo] = c * wl - s * wh
            work[:, :, hi] = s * wl + c * wh
            vl = right[:, :, lo]
            vh = right[:, :, hi]
            right[:, :, lo] = c * vl - s * vh
            right[:, :, hi] = s * vl + c * vh
        if not rotated:
            return sweep
    logger.debug("Jacobi SVD hit the sweep limit (%d)", MAX_SWEEPS)
    return MAX_SWEEPS


def _complete_columns(u: NDArray[np.float64], valid: NDArray[np.bool_]) -> None:
    """Replace invalid columns of ``u`` with an orthonormal completion."""
    m = u.shape[0]
    for col in np.flatnonzero(~valid):
        basis = u[:, valid]
        for candidate in np.eye(m):
            vec = candidate - basis @ (basis.T @ candidate)
            vec -= basis @ (basis.T @ vec)
            norm = np.linalg.norm(vec)
            if norm > 1e-6:
                u[:, col] = vec / norm
                valid[col] = True
                break


def svd_batch(
    a: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Thin SVD of a stack of matrices with shape (B, m, n).

    Returns:
        Tuple ``(U, S, V)`` with shapes (B, m, k), (B, k), (B, n, k) where
        ``k = min(m, n)``, singular values descending and
        ``a[b] = U[b] @ diag(S[b]) @ V[b].T``.

    Raises:
        ValueError: If any entry is not finite or the input is not 3D
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected a (B, m, n) stack, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("svd input contains non-finite entries")

    batch, m, n = a.shape
    if m < n:
        v, s, u = svd_batch(np.swapaxes(a, 1, 2))
        return u, s, v
    if m > n:
        # tall input: rotate the square triangular factor instead of long columns
        q, r = np.linalg.qr(a)
        u_r, s, v = svd_batch(r)
        return q @ u_r, s, v

    work = a.copy()
    right = np.broadcast_to(np.eye(n), (batch, n, n)).copy()
    sweeps = _jacobi_sweeps(work, right)
    logger.debug("Jacobi SVD converged in %d sweeps for %d matrices", sweeps, batch)

    norms = np.linalg.norm(work, axis=1)
    order = np.argsort(-norms, axis=1, kind="stable")
    s = np.take_along_axis(norms, order, axis=1)
    work = np.take_along_axis(work, order[:, None, :], axis=2)
    right = np.take_along_axis(right, order[:, None, :], axis=2)

    u = np.empty_like(work)
    for b in range(batch):
        scale = s[b, 0] if n else 0.0
        valid = s[b] > RANK_TOL * max(scale, 1e-300) * max(m, 1)
        valid &= s[b] > 0.0
        u[b][:, valid] = work[b][:, valid] / s[b, valid]
        if not valid.all():
            _complete_columns(u[b], valid.copy())
    return u, s, right


def svd(
    a: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Thin singular value decomposition of one matrix.

    Args:
        a: Matrix of shape (m, n) with finite entries

    Returns:
        ``(U, S, V)`` with U (m, k), S (k,) descending, V (n, k), k = min(m, n)

    Raises:
        ValueError: If the matrix has non-finite entries or is not 2D

    Example:
        >>> u, s, v = svd(np.diag([3.0, 1.0]))
        >>> [round(x, 12) for x in s]
        [3.0, 1.0]
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"svd expects a non-empty 2D matrix, got shape {a.shape}")
    u, s, v = svd_batch(a[None, :, :])
    return u[0], s[0], v[0]


def spectral_norm(a: NDArray[np.float64]) -> float:
    """Largest singular value of ``a``."""
    _, s, _ = svd(a)
    return float(s[0])
