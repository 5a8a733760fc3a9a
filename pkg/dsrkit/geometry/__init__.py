"""Local decision geometry around an input.

Probing planes, grid evaluation with compression in the loop, decision-space
metrics, the robust-radius proxy and the compressed-model radius bound check.
"""

from dsrkit.geometry.metrics import boundary_density, dsr_metrics
from dsrkit.geometry.plane import (
    DEFAULT_RADIUS,
    DEFAULT_RESOLUTION,
    build_plane,
    evaluate_grid,
    plane_points,
)
from dsrkit.geometry.radius import (
    UNBOUNDED,
    check_radius_bound,
    estimate_classifier_lipschitz,
    estimate_operator_lipschitz,
    exact_classifier_lipschitz,
    robust_radius_proxy,
)

__all__ = [
    "DEFAULT_RADIUS",
    "DEFAULT_RESOLUTION",
    "UNBOUNDED",
    "boundary_density",
    "build_plane",
    "check_radius_bound",
    "dsr_metrics",
    "estimate_classifier_lipschitz",
    "estimate_operator_lipschitz",
    "evaluate_grid",
    "exact_classifier_lipschitz",
    "plane_points",
    "robust_radius_proxy",
]
