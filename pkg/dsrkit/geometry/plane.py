"""2D probing planes and their evaluation with and without compression in the loop."""

import logging

import numpy as np
from numpy.typing import NDArray

from dsrkit.classifier.network import forward_batch, input_gradient, margins
from dsrkit.compression.base import CompressionOperator
from dsrkit.errors import DegenerateDirectionError, DegeneratePlaneError
from dsrkit.models import Classifier, Image, PlaneGrid, PlaneSpec
from dsrkit.numerics.linalg import DEGENERATE_TOL, l2_norm, orthogonal_complement
from dsrkit.numerics.random import RandomSource

logger = logging.getLogger(__name__)

DEFAULT_RADIUS = 0.35
DEFAULT_RESOLUTION = 61
MAX_REDRAWS = 8


def build_plane(
    model: Classifier,
    x: Image,
    y: int,
    rng: RandomSource,
    radius: float = DEFAULT_RADIUS,
    resolution: int = DEFAULT_RESOLUTION,
) -> PlaneSpec:
    """Plane spanned by the loss gradient and a random orthogonal direction.

    Args:
        model: Classifier providing the cross-entropy gradient
        x: Center image
        y: True label
        rng: Source for the random second direction
        radius: Half-width of the sampled square
        resolution: Samples per axis, odd

    Returns:
        Validated plane

    Raises:
        DegeneratePlaneError: If the gradient vanishes or no usable second
            direction is found within the redraw limit
    """
    x = np.asarray(x, dtype=np.float64)
    grad = input_gradient(model, x, y)
    norm = l2_norm(grad)
    if norm <= DEGENERATE_TOL:
        raise DegeneratePlaneError(f"loss gradient vanishes at the center (norm {norm:.3e})")
    u = grad / norm

    v = None
    for attempt in range(1, MAX_REDRAWS + 1):
        try:
            v = orthogonal_complement(u, rng.normal(x.shape))
            break
        except DegenerateDirectionError:
            logger.debug("second plane direction degenerate, redraw %d", attempt)
    if v is None:
        raise DegeneratePlaneError(f"no direction orthogonal to u after {MAX_REDRAWS} draws")

    spec = PlaneSpec(center=x, label=int(y), u=u, v=v, radius=radius, resolution=resolution)
    problems = spec.validate()
    if problems:
        raise DegeneratePlaneError("; ".join(problems))
    return spec


def plane_points(spec: PlaneSpec) -> NDArray[np.float64]:
    """All grid images ``clip(x + alpha u + beta v, 0, 1)``, shape (n*n, *x.shape).

    Rows of the grid follow v (beta), columns follow u (alpha).
    """
    offsets = spec.offsets
    n = offsets.shape[0]
    betas = np.repeat(offsets, n)
    alphas = np.tile(offsets, n)
    extra = (1,) * spec.center.ndim
    points = (
        spec.center[None, ...]
        + alphas.reshape(-1, *extra) * spec.u[None, ...]
        + betas.reshape(-1, *extra) * spec.v[None, ...]
    )
    return np.clip(points, 0.0, 1.0)


def evaluate_grid(
    model: Classifier,
    operator: CompressionOperator | None,
    spec: PlaneSpec,
) -> PlaneGrid:
    """Predicted labels and true-class margins over a plane.

    Args:
        model: Classifier f
        operator: Compression C applied before f, or None for f alone
        spec: Plane to sample

    Returns:
        Fully populated grid
    """
    points = plane_points(spec)
    if operator is not None:
        points = operator.compress_batch(points)
    logits = forward_batch(model, points)
    n = spec.resolution
    labels = np.argmax(logits, axis=1).astype(np.int64).reshape(n, n)
    true = np.full(logits.shape[0], spec.label, dtype=np.int64)
    grid_margins = margins(logits, true).reshape(n, n)
    return PlaneGrid(
        labels=labels,
        margins=grid_margins,
        true_label=spec.label,
        compression=None if operator is None else operator.name,
        spec=spec,
    )
