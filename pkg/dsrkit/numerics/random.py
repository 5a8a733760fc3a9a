"""Seedable, platform-independent random source.

Draws come from SplitMix64 evaluated in counter mode: the i-th 64-bit output
is ``mix(seed + (i + 1) * GAMMA)``. Because every output is a pure function of
(seed, counter), whole blocks of draws are produced with vectorized numpy
integer arithmetic and the sequence is identical on every platform.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TWO_POW_53 = float(1 << 53)

ALGORITHM = "splitmix64-counter"


def _mix(z: NDArray[np.uint64]) -> NDArray[np.uint64]:
    """SplitMix64 finalizer."""
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def mix_seed(seed: int, index: int) -> int:
    """Derive a child seed from a parent seed and a task index.

    Args:
        seed: Parent seed (any integer, reduced modulo 2**64)
        index: Task index of the child

    Returns:
        64-bit child seed
    """
    state = np.array([seed & _MASK64], dtype=np.uint64)
    salt = np.array([index & _MASK64], dtype=np.uint64)
    with np.errstate(over="ignore"):
        mixed = _mix(_mix(state + _GAMMA) ^ _mix(salt * _GAMMA + _GAMMA))
    return int(mixed[0])


class RandomSource:
    """Counter-based pseudo-random generator with an explicit seed.

    A RandomSource is single-owner. Parallel work derives children with
    :meth:`child`, whose seeds depend only on the parent seed and the index.

    Example:
        >>> a = RandomSource(7)
        >>> b = RandomSource(7)
        >>> bool((a.uniform(5) == b.uniform(5)).all())
        True
    """

    algorithm = ALGORITHM

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, counter={self.counter})"

    def next_u64(self, size: int) -> NDArray[np.uint64]:
        """Return the next ``size`` raw 64-bit outputs."""
        if size < 0:
            raise ValueError(f"size must be non-negative, got {size}")
        steps = np.arange(self.counter + 1, self.counter + size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + steps * _GAMMA
            out = _mix(state)
        self.counter += size
        return out

    def uniform(self, size: int | tuple[int, ...]) -> NDArray[np.float64]:
        """Uniform floats in [0, 1) with 53 bits of resolution."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        raw = self.next_u64(count) >> np.uint64(11)
        return (raw.astype(np.float64) / _TWO_POW_53).reshape(shape)

    def uniform_range(
        self, low: float, high: float, size: int | tuple[int, ...]
    ) -> NDArray[np.float64]:
        """Uniform floats in [low, high)."""
        return low + (high - low) * self.uniform(size)

    def normal(self, size: int | tuple[int, ...]) -> NDArray[np.float64]:
        """Standard normal draws via the Box-Muller transform."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        pairs = (count + 1) // 2
        u1 = 1.0 - self.uniform(pairs)  # (0, 1], keeps log finite
        u2 = self.uniform(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        values = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
        return values[:count].reshape(shape)

    def permutation(self, n: int) -> NDArray[np.int64]:
        """Fisher-Yates shuffle of ``range(n)``."""
        order = np.arange(n, dtype=np.int64)
        if n < 2:
            return order
        draws = self.uniform(n - 1)
        for step, i in enumerate(range(n - 1, 0, -1)):
            j = min(int(draws[step] * (i + 1)), i)
            order[i], order[j] = order[j], order[i]
        return order

    def child(self, index: int) -> RandomSource:
        """Independent child source for task ``index``."""
        return RandomSource(mix_seed(self.seed, index))
