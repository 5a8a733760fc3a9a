"""Data models for dsrkit.

This module defines the core data structures passed between the packages:
datasets and classifiers, attack and pipeline settings, probing planes and
their evaluated grids, the decision-space metrics, and result rows.

Images are float64 numpy arrays with values in [0, 1], shaped (H, W) for a
single channel or (H, W, C); batches add a leading axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

if TYPE_CHECKING:
    from dsrkit.compression.operators import CompressionOperator

Image = NDArray[np.float64]


class Split(str, Enum):
    """Dataset split tag."""

    TRAIN = "train"
    TEST = "test"


class AttackKind(str, Enum):
    """Supported gradient attacks."""

    FGSM = "fgsm"
    PGD = "pgd"


class PipelineOrder(str, Enum):
    """Where compression sits relative to the attack."""

    ATTACK_ONLY = "attack_only"
    COMPRESS_THEN_ATTACK = "compress_then_attack"
    ATTACK_THEN_COMPRESS = "attack_then_compress"
    COMPRESS_ONLY = "compress_only"


@dataclass
class LabeledDataset:
    """Stack of equally shaped images with integer labels.

    Attributes:
        images: Array of shape (N, H, W) or (N, H, W, C), values in [0, 1]
        labels: Integer array of shape (N,)
        num_classes: Class count K
        split: Train or test tag

    Example:
        >>> ds = LabeledDataset(np.zeros((2, 8, 8)), np.array([0, 1]), 2)
        >>> len(ds), ds.image_shape
        (2, (8, 8))
    """

    images: NDArray[np.float64]
    labels: NDArray[np.int64]
    num_classes: int
    split: Split = Split.TRAIN

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def image_shape(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.images.shape[1:])

    @property
    def dimension(self) -> int:
        return int(np.prod(self.image_shape, dtype=np.int64))

    def flat(self) -> NDArray[np.float64]:
        """Images flattened to shape (N, d)."""
        return self.images.reshape(len(self), -1)

    def validate(self) -> list[str]:
        """Validate shapes, label range and pixel range.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []

        if self.images.ndim not in (3, 4):
            errors.append(f"images must have shape (N, H, W[, C]), got {self.images.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.images.shape[0]:
            errors.append("labels must be a vector with one entry per image")
        if self.num_classes < 2:
            errors.append(f"num_classes must be at least 2, got {self.num_classes}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            errors.append("labels must lie in 0..num_classes-1")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            errors.append("pixel values must lie in [0, 1]")

        return errors

    def is_valid(self) -> bool:
        """Check if the dataset is valid."""
        return len(self.validate()) == 0


@dataclass
class Classifier:
    """Fully connected ReLU network on flattened pixels.

    Layer ``i`` computes ``W[i] @ h + b[i]`` with ``W[i]`` of shape
    (fan_out, fan_in); ReLU follows every layer except the last.

    Attributes:
        weights: Weight matrices, first one has fan_in = d
        biases: Bias vectors, one per layer
        input_shape: Image shape the network expects
    """

    weights: list[NDArray[np.float64]]
    biases: list[NDArray[np.float64]]
    input_shape: tuple[int, ...]

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape, dtype=np.int64))

    @property
    def num_classes(self) -> int:
        return int(self.weights[-1].shape[0])

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim] + [int(w.shape[0]) for w in self.weights]

    @property
    def is_linear(self) -> bool:
        return len(self.weights) == 1

    def copy(self) -> Classifier:
        """Deep copy of all parameters."""
        return Classifier(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            input_shape=tuple(self.input_shape),
        )

    def validate(self) -> list[str]:
        """Validate that layer shapes chain and parameters are finite.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []

        if not self.weights:
            errors.append("classifier needs at least one layer")
            return errors
        if len(self.weights) != len(self.biases):
            errors.append("weights and biases must have the same length")

        fan_in = self.input_dim
        for i, (w, b) in enumerate(zip(self.weights, self.biases, strict=False)):
            if w.ndim != 2 or w.shape[1] != fan_in:
                errors.append(f"layer {i} expects fan_in {fan_in}, has shape {w.shape}")
            if b.shape != (w.shape[0],):
                errors.append(f"layer {i} bias shape {b.shape} does not match {w.shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                errors.append(f"layer {i} has non-finite parameters")
            fan_in = w.shape[0]

        if self.num_classes < 2:
            errors.append(f"classifier needs at least 2 outputs, has {self.num_classes}")

        return errors

    def is_valid(self) -> bool:
        """Check if the classifier is valid."""
        return len(self.validate()) == 0


@dataclass
class PcaBasis:
    """Fitted PCA basis.

    Attributes:
        mean: Mean image, flattened to length d
        components: Array (k, d) of orthonormal rows
        explained: Fraction of centered energy captured by each component
        image_shape: Shape of the images the basis was fitted on
    """

    mean: NDArray[np.float64]
    components: NDArray[np.float64]
    explained: NDArray[np.float64]
    image_shape: tuple[int, ...]

    @property
    def k(self) -> int:
        return int(self.components.shape[0])

    def validate(self) -> list[str]:
        """Validate component count and orthonormality.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []
        d = self.mean.shape[0]
        if self.components.ndim != 2 or self.components.shape[1] != d:
            errors.append("components must have shape (k, d)")
            return errors
        if not 1 <= self.k <= d:
            errors.append(f"component count {self.k} must lie in 1..{d}")
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(self.k), atol=1e-8):
            errors.append("components are not orthonormal")
        return errors

    def is_valid(self) -> bool:
        """Check if the basis is valid."""
        return len(self.validate()) == 0


@dataclass
class AttackConfig:
    """L-infinity attack settings.

    Attributes:
        kind: FGSM or PGD
        epsilon: Budget in pixel units
        alpha: PGD step size
        iterations: PGD step count
        random_start: Start PGD from a uniform point in the epsilon ball
        seed: Seed for the random start

    Example:
        >>> AttackConfig(kind=AttackKind.PGD, epsilon=2 / 255, alpha=1 / 255).is_valid()
        True
    """

    kind: AttackKind = AttackKind.FGSM
    epsilon: float = 0.01
    alpha: float = 1.0 / 255.0
    iterations: int = 5
    random_start: bool = False
    seed: int = 0

    def validate(self) -> list[str]:
        """Validate the budget and PGD schedule.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []

        if not math.isfinite(self.epsilon) or self.epsilon < 0.0:
            errors.append(f"epsilon must be a finite value >= 0, got {self.epsilon}")
        if self.kind == AttackKind.PGD:
            if not self.alpha > 0.0:
                errors.append(f"alpha must be > 0 for pgd, got {self.alpha}")
            if self.iterations < 1:
                errors.append(f"iterations must be >= 1 for pgd, got {self.iterations}")

        return errors

    def is_valid(self) -> bool:
        """Check if the attack configuration is valid."""
        return len(self.validate()) == 0


@dataclass
class PipelineSpec:
    """One row of an attack table: compression operator, attack and their order.

    Attributes:
        label: Row label used in tables (e.g. "JPEG->FGSM")
        order: Composition order
        operator: Compression operator, required unless attack_only
        attack: Attack settings, required unless compress_only
    """

    label: str
    order: PipelineOrder
    operator: CompressionOperator | None = None
    attack: AttackConfig | None = None

    def validate(self) -> list[str]:
        """Validate that the required parts for the order are present.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []

        if self.order != PipelineOrder.ATTACK_ONLY and self.operator is None:
            errors.append(f"pipeline '{self.label}' ({self.order.value}) needs an operator")
        if self.order != PipelineOrder.COMPRESS_ONLY:
            if self.attack is None:
                errors.append(f"pipeline '{self.label}' ({self.order.value}) needs an attack")
            else:
                errors.extend(f"pipeline '{self.label}': {e}" for e in self.attack.validate())

        return errors

    def is_valid(self) -> bool:
        """Check if the pipeline is valid."""
        return len(self.validate()) == 0


@dataclass
class PlaneSpec:
    """2D slice through input space around one example.

    Grid point (i, j) sits at ``center + alphas[j] * u + betas[i] * v``.

    Attributes:
        center: Image x
        label: True class y
        u: Unit loss-gradient direction, same shape as center
        v: Unit direction orthogonal to u
        radius: Half-width of the sampled square in pixel units
        resolution: Samples per axis (odd)
    """

    center: Image
    label: int
    u: Image
    v: Image
    radius: float = 0.35
    resolution: int = 61

    @property
    def offsets(self) -> NDArray[np.float64]:
        """Coordinates along each axis, symmetric with an exact zero in the middle."""
        half = self.resolution // 2
        return self.radius * np.arange(-half, half + 1, dtype=np.float64) / max(half, 1)

    def validate(self) -> list[str]:
        """Validate unit norms, orthogonality, radius and resolution.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []
        u = self.u.ravel()
        v = self.v.ravel()

        if self.u.shape != self.center.shape or self.v.shape != self.center.shape:
            errors.append("directions must have the shape of the center image")
            return errors
        if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
            errors.append("u must have unit norm")
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
            errors.append("v must have unit norm")
        if abs(float(u @ v)) > 1e-9:
            errors.append("u and v must be orthogonal")
        if not self.radius > 0.0:
            errors.append(f"radius must be > 0, got {self.radius}")
        if self.resolution < 1 or self.resolution % 2 == 0:
            errors.append(f"resolution must be a positive odd count, got {self.resolution}")

        return errors

    def is_valid(self) -> bool:
        """Check if the plane is valid."""
        return len(self.validate()) == 0


@dataclass
class PlaneGrid:
    """Predictions and margins sampled on a plane.

    Attributes:
        labels: (n, n) predicted labels, rows follow v, columns follow u
        margins: (n, n) true-class margins
        true_label: Class y the margins refer to
        compression: Name of the operator used in the loop, or None
        spec: Plane the grid was sampled on (absent for hand-built grids)
    """

    labels: NDArray[np.int64]
    margins: NDArray[np.float64]
    true_label: int
    compression: str | None = None
    spec: PlaneSpec | None = None

    def validate(self) -> list[str]:
        """Validate shape agreement and finiteness.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []
        if self.labels.ndim != 2 or self.labels.shape != self.margins.shape:
            errors.append("labels and margins must be equally shaped 2D grids")
        if not np.all(np.isfinite(self.margins)):
            errors.append("margins must be finite")
        return errors

    def is_valid(self) -> bool:
        """Check if the grid is valid."""
        return len(self.validate()) == 0


@dataclass(frozen=True)
class DsrMetrics:
    """Decision-space summary of one grid.

    Attributes:
        area: Fraction of grid points predicted as the true class
        mean_margin: Mean true-class margin
        intrusion: Fraction of points with negative margin
        density: Fraction of 4-neighbour pairs whose labels differ
    """

    area: float
    mean_margin: float
    intrusion: float
    density: float

    METRIC_NAMES = ("area", "mean_margin", "intrusion", "density")

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.METRIC_NAMES}


@dataclass(frozen=True)
class RadiusBoundReport:
    """Outcome of checking the compressed-model robust-radius bound at one input.

    Attributes:
        bound: m(C(x)) / (L_f * L_C)
        empirical_radius: Smallest misclassifying perturbation norm found
        holds: empirical_radius >= bound - 1e-9
        certified: Lipschitz constants are exact rather than estimated
        lipschitz_f: Constant used for the classifier
        lipschitz_c: Constant used for the operator
        compressed_margin: m(C(x))
    """

    bound: float
    empirical_radius: float
    holds: bool
    certified: bool
    lipschitz_f: float
    lipschitz_c: float
    compressed_margin: float

    @property
    def advisory(self) -> bool:
        return not self.certified


@dataclass(frozen=True)
class ResultRow:
    """Accuracy and distortion of one pipeline over a test split.

    Attributes:
        label: Pipeline label
        accuracy: Accuracy in percent
        psnr: Mean PSNR in dB against the clean images
        count: Number of evaluated examples
    """

    label: str
    accuracy: float
    psnr: float
    count: int

    def validate(self) -> list[str]:
        """Validate accuracy and PSNR ranges.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []
        if not 0.0 <= self.accuracy <= 100.0:
            errors.append(f"accuracy {self.accuracy} outside [0, 100]")
        if not 0.0 < self.psnr <= 100.0:
            errors.append(f"psnr {self.psnr} outside (0, 100]")
        if self.count < 0:
            errors.append("count must be non-negative")
        return errors

    def is_valid(self) -> bool:
        """Check if the row is valid."""
        return len(self.validate()) == 0


@dataclass(frozen=True)
class SweepRow:
    """One (quality, metric) aggregate of a quality sweep."""

    quality: str
    metric: str
    mean: float
    std: float


@dataclass(frozen=True)
class EpsilonRow:
    """Accuracy of one attack row at each budget of an epsilon ablation."""

    label: str
    epsilons: tuple[float, ...]
    accuracies: tuple[float, ...]


@dataclass(frozen=True)
class RadiusRow:
    """Robust-radius proxy statistics for one compression setting."""

    quality: str
    mean_radius: float
    std_radius: float
    mean_margin: float
    count: int


@dataclass
class SweepResult:
    """Per-quality metric means and standard deviations of a sweep."""

    rows: list[SweepRow] = field(default_factory=list)
    seed_count: int = 0

    def value(self, quality: str, metric: str) -> tuple[float, float]:
        """Return (mean, std) for one cell.

        Raises:
            KeyError: If the cell is absent
        """
        for row in self.rows:
            if row.quality == quality and row.metric == metric:
                return row.mean, row.std
        raise KeyError(f"no sweep row for quality={quality} metric={metric}")
