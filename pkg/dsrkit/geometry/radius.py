"""Robust-radius proxy and the compressed-model radius bound check.

The bound check compares ``m(C(x)) / (L_f * L_C)`` with the smallest
misclassifying perturbation found by line search. L_f is the Lipschitz
constant of the pairwise logit differences ``f_y - f_k`` (the quantity that
must change sign), which for a linear model is at most sqrt(2) times the
spectral norm of the weight matrix.
"""

import logging
import math

import numpy as np
from numpy.typing import NDArray

from dsrkit.classifier.network import forward, forward_batch, margin, margin_gradient
from dsrkit.compression.base import CompressionOperator
from dsrkit.errors import PreconditionError
from dsrkit.models import Classifier, Image, RadiusBoundReport
from dsrkit.numerics.linalg import DEGENERATE_TOL, l2_norm
from dsrkit.numerics.random import RandomSource
from dsrkit.numerics.svd import spectral_norm

logger = logging.getLogger(__name__)

UNBOUNDED = math.inf
PROBE_RADIUS = 0.35
BOUND_SLACK = 1e-9


def robust_radius_proxy(model: Classifier, x: Image, y: int) -> float:
    """First-order distance to the decision boundary, ``m(x) / ||grad m(x)||``.

    Returns:
        0.0 for a misclassified input, ``math.inf`` when the margin is positive
        and its gradient vanishes, the ratio otherwise
    """
    m = margin(forward(model, x), y)
    if m <= 0.0:
        return 0.0
    norm = l2_norm(margin_gradient(model, x, y))
    if norm <= DEGENERATE_TOL:
        return UNBOUNDED
    return m / norm


def _pair_differences(logits: NDArray[np.float64], y: int) -> NDArray[np.float64]:
    """``f_y - f_k`` for every k != y, shape (N, K - 1)."""
    others = np.delete(logits, y, axis=1)
    return logits[:, [y]] - others


def _random_offsets(
    rng: RandomSource, count: int, shape: tuple[int, ...], radius: float
) -> NDArray[np.float64]:
    """Random perturbations with norms uniform in (0, radius]."""
    directions = rng.normal((count, *shape))
    flat = directions.reshape(count, -1)
    norms = np.linalg.norm(flat, axis=1)
    scale = radius * (1.0 - rng.uniform(count)) / norms
    return directions * scale.reshape(-1, *(1,) * len(shape))


def estimate_operator_lipschitz(
    operator: CompressionOperator,
    x: Image,
    probes: int,
    rng: RandomSource,
    radius: float = PROBE_RADIUS,
) -> float:
    """Largest ``||C(a) - C(b)|| / ||a - b||`` over random pairs near ``x``."""
    a = x[None, ...] + _random_offsets(rng, probes, x.shape, radius)
    b = x[None, ...] + _random_offsets(rng, probes, x.shape, radius)
    moved = operator.compress_batch(a) - operator.compress_batch(b)
    num = np.linalg.norm(moved.reshape(probes, -1), axis=1)
    den = np.linalg.norm((a - b).reshape(probes, -1), axis=1)
    keep = den > DEGENERATE_TOL
    return float(np.max(num[keep] / den[keep])) if keep.any() else 0.0


def estimate_classifier_lipschitz(
    model: Classifier,
    z: Image,
    y: int,
    probes: int,
    rng: RandomSource,
    radius: float = PROBE_RADIUS,
) -> float:
    """Largest change of any ``f_y - f_k`` per unit input change near ``z``."""
    a = z[None, ...] + _random_offsets(rng, probes, z.shape, radius)
    b = z[None, ...] + _random_offsets(rng, probes, z.shape, radius)
    da = _pair_differences(forward_batch(model, a), y)
    db = _pair_differences(forward_batch(model, b), y)
    num = np.max(np.abs(da - db), axis=1)
    den = np.linalg.norm((a - b).reshape(probes, -1), axis=1)
    keep = den > DEGENERATE_TOL
    return float(np.max(num[keep] / den[keep])) if keep.any() else 0.0


def exact_classifier_lipschitz(model: Classifier) -> float:
    """sqrt(2) times the product of layer spectral norms.

    Bounds every pairwise logit difference for ReLU networks; it is tight
    enough to certify only when the model is a single affine layer.
    """
    product = 1.0
    for w in model.weights:
        product *= spectral_norm(w)
    return math.sqrt(2.0) * product


def _misclassified(
    model: Classifier, operator: CompressionOperator, points: NDArray[np.float64], y: int
) -> NDArray[np.bool_]:
    """Whether g = f(C(.)) gets each point wrong."""
    logits = forward_batch(model, operator.compress_batch(points))
    return np.argmax(logits, axis=1) != y


def _line_search(
    model: Classifier,
    operator: CompressionOperator,
    x: Image,
    y: int,
    direction: NDArray[np.float64],
    search_radius: float,
    steps: int,
    bisections: int,
) -> float:
    """Smallest t (to bisection precision) with g(x + t d) misclassified, or inf."""
    ts = search_radius * np.arange(1, steps + 1, dtype=np.float64) / steps
    points = x[None, ...] + ts.reshape(-1, *(1,) * x.ndim) * direction[None, ...]
    hits = np.flatnonzero(_misclassified(model, operator, points, y))
    if hits.size == 0:
        return UNBOUNDED
    first = int(hits[0])
    lo = 0.0 if first == 0 else float(ts[first - 1])
    hi = float(ts[first])
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if _misclassified(model, operator, (x + mid * direction)[None, ...], y)[0]:
            hi = mid
        else:
            lo = mid
    return hi


def check_radius_bound(
    model: Classifier,
    operator: CompressionOperator,
    x: Image,
    y: int,
    probes: int = 32,
    seed: int = 0,
    search_radius: float = 10.0,
    steps: int = 200,
    bisections: int = 50,
) -> RadiusBoundReport:
    """Check the compressed-model radius bound at one input.

    Args:
        model: Classifier f
        operator: Compression C
        x: Input image (unclipped perturbations are sampled around it)
        y: True label
        probes: Random pairs for the Lipschitz estimates and line-search directions
        seed: Seed for all probes
        search_radius: Longest perturbation tried along each direction
        steps: Coarse scan points per direction before bisection
        bisections: Bisection iterations per direction

    Returns:
        Report with the bound, the empirical radius and whether the bound held

    Raises:
        PreconditionError: If C(x) is not correctly classified with positive margin
    """
    x = np.asarray(x, dtype=np.float64)
    z = operator.compress(x)
    compressed_margin = margin(forward(model, z), y)
    if compressed_margin <= 0.0:
        raise PreconditionError(f"m(C(x)) = {compressed_margin:.6g} must be positive")

    rng = RandomSource(seed)
    exact_c = operator.exact_lipschitz
    certified = model.is_linear and exact_c is not None
    if model.is_linear and exact_c is not None:
        lipschitz_f = exact_classifier_lipschitz(model)
        lipschitz_c = exact_c
    else:
        lipschitz_c = estimate_operator_lipschitz(operator, x, probes, rng.child(0))
        lipschitz_f = estimate_classifier_lipschitz(model, z, y, probes, rng.child(1))
        logger.warning(
            "radius bound for %s is advisory: Lipschitz constants are estimated", operator.name
        )

    scale = lipschitz_f * lipschitz_c
    bound = compressed_margin / scale if scale > 0.0 else UNBOUNDED

    directions = [-margin_gradient(model, z, y), *rng.child(2).normal((probes, *x.shape))]
    radius = UNBOUNDED
    for direction in directions:
        norm = l2_norm(direction)
        if norm <= DEGENERATE_TOL:
            continue
        found = _line_search(
            model, operator, x, y, direction / norm, search_radius, steps, bisections
        )
        radius = min(radius, found)

    return RadiusBoundReport(
        bound=bound,
        empirical_radius=radius,
        holds=radius >= bound - BOUND_SLACK,
        certified=certified,
        lipschitz_f=lipschitz_f,
        lipschitz_c=lipschitz_c,
        compressed_margin=compressed_margin,
    )
