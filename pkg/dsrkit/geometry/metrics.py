"""Decision-space reduction metrics of an evaluated grid.

Sums use ``math.fsum`` (exactly rounded), so the metrics do not depend on the
order in which grid points are visited.
"""

import math

import numpy as np

from dsrkit.models import DsrMetrics, PlaneGrid


def boundary_density(labels: np.ndarray) -> float:
    """Fraction of horizontally or vertically adjacent pairs with different labels."""
    rows, cols = labels.shape
    pairs = rows * (cols - 1) + (rows - 1) * cols
    if pairs == 0:
        return 0.0
    horizontal = int(np.count_nonzero(labels[:, 1:] != labels[:, :-1]))
    vertical = int(np.count_nonzero(labels[1:, :] != labels[:-1, :]))
    return (horizontal + vertical) / pairs


def dsr_metrics(grid: PlaneGrid) -> DsrMetrics:
    """Area fraction, mean margin, boundary intrusion and boundary density.

    Raises:
        ValueError: If the grid is empty or malformed

    Example:
        >>> grid = PlaneGrid(np.array([[0, 0], [0, 1]]),
        ...                  np.array([[0.5, 0.2], [0.1, -0.3]]), true_label=0)
        >>> dsr_metrics(grid).area
        0.75
    """
    problems = grid.validate()
    if problems:
        raise ValueError("invalid grid: " + "; ".join(problems))
    count = grid.labels.size
    if count == 0:
        raise ValueError("cannot compute metrics of an empty grid")

    area = int(np.count_nonzero(grid.labels == grid.true_label)) / count
    mean_margin = math.fsum(grid.margins.ravel().tolist()) / count
    intrusion = int(np.count_nonzero(grid.margins < 0.0)) / count
    return DsrMetrics(
        area=area,
        mean_margin=mean_margin,
        intrusion=intrusion,
        density=boundary_density(grid.labels),
    )
