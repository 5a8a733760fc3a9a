"""PCA compression: projection onto the leading principal components."""

import numpy as np
from numpy.typing import NDArray

from dsrkit.compression.base import CompressionOperator
from dsrkit.errors import DimensionError
from dsrkit.models import Image, LabeledDataset, PcaBasis
from dsrkit.numerics.svd import svd


def pca_fit(dataset: LabeledDataset, k: int) -> PcaBasis:
    """Fit a k-component basis to a dataset.

    Args:
        dataset: Images to fit on (the training split)
        k: Component count, 1 <= k <= min(d, N)

    Returns:
        Fitted basis

    Raises:
        ValueError: If k is out of range or the dataset is empty
    """
    count = len(dataset)
    d = dataset.dimension
    if count == 0:
        raise ValueError("cannot fit PCA on an empty dataset")
    if not 1 <= k <= min(d, count):
        raise ValueError(f"PCA component count must lie in 1..{min(d, count)}, got {k}")

    data = dataset.flat()
    mean = data.mean(axis=0)
    _, s, v = svd(data - mean)
    energy = s * s
    total = float(energy.sum())
    explained = energy[:k] / total if total > 0.0 else np.zeros(k)
    return PcaBasis(
        mean=mean,
        components=v[:, :k].T.copy(),
        explained=explained,
        image_shape=dataset.image_shape,
    )


def _flatten(basis: PcaBasis, xs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Check the image shape against the basis and flatten to (N, d)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.shape[1:] != tuple(basis.image_shape):
        raise DimensionError(
            f"basis fitted on images of shape {basis.image_shape}, got {xs.shape[1:]}"
        )
    return xs.reshape(xs.shape[0], -1)


def pca_project_batch(basis: PcaBasis, xs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Unclipped reconstruction ``mean + sum_i <x - mean, c_i> c_i``."""
    flat = _flatten(basis, xs) - basis.mean
    coords = flat @ basis.components.T
    return (basis.mean + coords @ basis.components).reshape(np.shape(xs))


def pca_compress(basis: PcaBasis, x: Image) -> Image:
    """Project one image onto the basis and clip to [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return np.clip(pca_project_batch(basis, x[None, ...])[0], 0.0, 1.0)


class PcaOperator(CompressionOperator):
    """Projection onto a fitted PCA basis followed by clipping."""

    family = "PCA"

    def __init__(self, basis: PcaBasis) -> None:
        problems = basis.validate()
        if problems:
            raise ValueError("invalid PCA basis: " + "; ".join(problems))
        self.basis = basis
        self.name = f"pca(k={basis.k})"

    @property
    def exact_lipschitz(self) -> float | None:
        # orthogonal projection and clipping are both 1-Lipschitz
        return 1.0

    def compress_batch(self, xs: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.clip(pca_project_batch(self.basis, xs), 0.0, 1.0)
