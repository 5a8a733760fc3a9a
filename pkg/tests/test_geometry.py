"""Tests for probing planes, DSR metrics and robust-radius checks."""

import math

import numpy as np
import pytest

from dsrkit.classifier import forward, forward_batch, init_classifier, margin
from dsrkit.compression import IdentityOperator, JpegOperator, PcaOperator, pca_fit
from dsrkit.errors import DegeneratePlaneError, PreconditionError
from dsrkit.geometry import (
    UNBOUNDED,
    boundary_density,
    build_plane,
    check_radius_bound,
    dsr_metrics,
    estimate_classifier_lipschitz,
    estimate_operator_lipschitz,
    evaluate_grid,
    exact_classifier_lipschitz,
    plane_points,
    robust_radius_proxy,
)
from dsrkit.models import Classifier, LabeledDataset, PlaneGrid
from dsrkit.numerics import RandomSource, spectral_norm


class TestPlane:
    """Tests for plane construction and evaluation."""

    def test_directions_orthonormal(self, small_model: Classifier, rng: RandomSource) -> None:
        """Test that u and v are orthonormal and u follows the loss gradient."""
        x = rng.uniform((8, 8))
        spec = build_plane(small_model, x, 1, rng, radius=0.2, resolution=9)

        assert spec.is_valid()
        assert abs(float(spec.u.ravel() @ spec.v.ravel())) <= 1e-9
        assert spec.offsets.tolist()[4] == 0.0
        assert spec.offsets[0] == -0.2

    def test_points_clipped(self, small_model: Classifier, rng: RandomSource) -> None:
        """Test that grid points stay inside [0, 1] and the middle point is the center."""
        x = rng.uniform((8, 8))
        spec = build_plane(small_model, x, 0, rng, radius=2.0, resolution=5)
        points = plane_points(spec)

        assert points.shape == (25, 8, 8)
        assert points.min() >= 0.0
        assert points.max() <= 1.0
        assert np.array_equal(points[12], x)

    def test_grid_center_matches_model(self, small_model: Classifier, rng: RandomSource) -> None:
        """Test that the center cell reports the prediction and margin at x."""
        x = rng.uniform((8, 8))
        spec = build_plane(small_model, x, 2, rng, resolution=7)
        grid = evaluate_grid(small_model, None, spec)
        logits = forward(small_model, x)

        assert grid.labels.shape == (7, 7)
        assert grid.labels[3, 3] == int(np.argmax(logits))
        assert math.isclose(grid.margins[3, 3], margin(logits, 2), abs_tol=1e-12)
        assert grid.compression is None

    def test_identity_operator_matches_plain_grid(
        self, small_model: Classifier, rng: RandomSource
    ) -> None:
        """Test that C = identity reproduces the uncompressed grid exactly."""
        spec = build_plane(small_model, rng.uniform((8, 8)), 0, rng, resolution=9)
        plain = evaluate_grid(small_model, None, spec)
        compressed = evaluate_grid(small_model, IdentityOperator(), spec)

        assert np.array_equal(plain.labels, compressed.labels)
        assert np.array_equal(plain.margins, compressed.margins)
        assert compressed.compression == "identity"

    def test_compressed_grid_uses_operator(
        self, small_model: Classifier, rng: RandomSource
    ) -> None:
        """Test that grid margins are computed on compressed points."""
        operator = JpegOperator(20)
        spec = build_plane(small_model, rng.uniform((8, 8)), 1, rng, resolution=3)
        grid = evaluate_grid(small_model, operator, spec)
        logits = forward_batch(small_model, operator.compress_batch(plane_points(spec)))

        assert np.array_equal(grid.labels.ravel(), np.argmax(logits, axis=1))

    def test_same_seed_same_plane(self, small_model: Classifier) -> None:
        """Test that the plane is a function of the seed."""
        x = np.full((8, 8), 0.5)
        a = build_plane(small_model, x, 0, RandomSource(3))
        b = build_plane(small_model, x, 0, RandomSource(3))

        assert np.array_equal(a.v, b.v)

    def test_vanishing_gradient(self, rng: RandomSource) -> None:
        """Test that a zero gradient raises DegeneratePlaneError."""
        model = Classifier([np.zeros((2, 64))], [np.zeros(2)], (8, 8))

        with pytest.raises(DegeneratePlaneError):
            build_plane(model, np.full((8, 8), 0.5), 0, rng)

    def test_even_resolution_rejected(self, small_model: Classifier, rng: RandomSource) -> None:
        """Test that an even resolution fails plane validation."""
        with pytest.raises(DegeneratePlaneError):
            build_plane(small_model, rng.uniform((8, 8)), 0, rng, resolution=4)


class TestMetrics:
    """Tests for the DSR metrics."""

    def test_metrics_example(self) -> None:
        """Test all four metrics on a hand-built 2x2 grid."""
        grid = PlaneGrid(
            labels=np.array([[0, 0], [0, 1]]),
            margins=np.array([[0.5, 0.2], [0.1, -0.3]]),
            true_label=0,
        )
        metrics = dsr_metrics(grid)

        assert metrics.area == 0.75
        assert math.isclose(metrics.mean_margin, 0.125, abs_tol=1e-15)
        assert metrics.intrusion == 0.25
        assert metrics.density == 0.5

    def test_uniform_grid_has_no_boundary(self) -> None:
        """Test density 0 and area 1 on a constant correct grid."""
        grid = PlaneGrid(np.zeros((5, 5), dtype=np.int64), np.ones((5, 5)), true_label=0)
        metrics = dsr_metrics(grid)

        assert metrics.area == 1.0
        assert metrics.density == 0.0
        assert metrics.intrusion == 0.0

    def test_checkerboard_density(self) -> None:
        """Test that a checkerboard has every neighbour pair on a boundary."""
        i, j = np.indices((6, 6))

        assert boundary_density((i + j) % 2) == 1.0

    def test_single_cell(self) -> None:
        """Test that a 1x1 grid has density 0."""
        assert boundary_density(np.zeros((1, 1), dtype=np.int64)) == 0.0

    def test_empty_grid(self) -> None:
        """Test that an empty grid raises ValueError."""
        grid = PlaneGrid(np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0)), true_label=0)

        with pytest.raises(ValueError):
            dsr_metrics(grid)

    def test_mismatched_grid(self) -> None:
        """Test that label and margin grids of different shape are rejected."""
        grid = PlaneGrid(np.zeros((2, 2), dtype=np.int64), np.zeros((3, 3)), true_label=0)

        with pytest.raises(ValueError):
            dsr_metrics(grid)


class TestRobustRadius:
    """Tests for the first-order robust-radius proxy."""

    def _two_class(self) -> Classifier:
        w = np.array([[1.0, 2.0, 0.0, -1.0], [0.0, -1.0, 1.0, 1.0]])
        return Classifier([w], [np.array([0.5, 0.0])], (4,))

    def test_linear_model_exact_distance(self) -> None:
        """Test that the proxy is the exact boundary distance for a linear model."""
        model = self._two_class()
        x = np.array([0.5, 0.5, 0.1, 0.2])
        radius = robust_radius_proxy(model, x, 0)
        diff = model.weights[0][0] - model.weights[0][1]
        boundary_point = x - radius * diff / np.linalg.norm(diff)

        assert radius > 0.0
        assert abs(margin(forward(model, boundary_point), 0)) < 1e-12

    def test_misclassified_is_zero(self) -> None:
        """Test that a non-positive margin gives radius 0."""
        model = self._two_class()

        assert robust_radius_proxy(model, np.array([0.5, 0.5, 0.1, 0.2]), 1) == 0.0

    def test_flat_margin_is_unbounded(self) -> None:
        """Test that a positive margin with zero gradient is unbounded."""
        model = Classifier([np.zeros((2, 3))], [np.array([1.0, 0.0])], (3,))

        assert robust_radius_proxy(model, np.zeros(3), 0) == UNBOUNDED


class TestRadiusBound:
    """Tests for the compressed-model radius bound check."""

    def test_exact_lipschitz_of_linear_model(self, linear_model: Classifier) -> None:
        """Test sqrt(2) times the spectral norm for a single layer."""
        expected = math.sqrt(2.0) * spectral_norm(linear_model.weights[0])

        assert math.isclose(exact_classifier_lipschitz(linear_model), expected, rel_tol=1e-12)

    def test_holds_for_linear_model_with_pca(
        self, small_data: tuple[LabeledDataset, LabeledDataset]
    ) -> None:
        """Test that the certified bound never exceeds the empirical radius."""
        train_split, test_split = small_data
        operator = PcaOperator(pca_fit(train_split, 10))
        for trial in range(12):
            model = init_classifier((8, 8), 3, (), RandomSource(100 + trial))
            x = test_split.images[trial]
            y = int(np.argmax(forward(model, operator(x))))
            report = check_radius_bound(model, operator, x, y, probes=8, seed=trial)

            assert report.certified
            assert report.lipschitz_c == 1.0
            assert report.bound > 0.0
            assert report.holds
            assert report.empirical_radius >= report.bound - 1e-9

    @pytest.mark.slow
    def test_hundred_seeded_instances(
        self, small_data: tuple[LabeledDataset, LabeledDataset]
    ) -> None:
        """Test 100 certified linear + PCA instances across several bases."""
        train_split, test_split = small_data
        operators = [PcaOperator(pca_fit(train_split, k)) for k in (4, 16, 64)]
        held = 0
        for trial in range(100):
            operator = operators[trial % len(operators)]
            model = init_classifier((8, 8), 3, (), RandomSource(1000 + trial))
            x = test_split.images[trial % len(test_split)]
            y = int(np.argmax(forward(model, operator(x))))
            report = check_radius_bound(model, operator, x, y, probes=16, seed=trial)

            assert report.certified
            held += int(report.holds)

        assert held == 100

    def test_jpeg_bound_is_advisory(self, small_model: Classifier, rng: RandomSource) -> None:
        """Test that operators without an exact constant give an advisory report."""
        operator = JpegOperator(50)
        x = rng.uniform((8, 8))
        y = int(np.argmax(forward(small_model, operator(x))))
        report = check_radius_bound(small_model, operator, x, y, probes=4, steps=50)

        assert not report.certified
        assert report.advisory
        assert report.bound > 0.0
        assert report.compressed_margin > 0.0

    def test_certified_report_uses_exact_constants(
        self,
        small_data: tuple[LabeledDataset, LabeledDataset],
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        """Test that a certified check never probes and reports the exact constants."""

        def _no_probing(*args: object, **kwargs: object) -> float:
            raise AssertionError("Lipschitz estimate computed on the certified path")

        monkeypatch.setattr("dsrkit.geometry.radius.estimate_operator_lipschitz", _no_probing)
        monkeypatch.setattr("dsrkit.geometry.radius.estimate_classifier_lipschitz", _no_probing)
        train_split, test_split = small_data
        operator = PcaOperator(pca_fit(train_split, 10))
        model = init_classifier((8, 8), 3, (), RandomSource(321))
        x = test_split.images[0]
        y = int(np.argmax(forward(model, operator(x))))
        report = check_radius_bound(model, operator, x, y, probes=4, steps=50)

        assert report.certified
        assert report.lipschitz_c == 1.0
        assert report.lipschitz_f == exact_classifier_lipschitz(model)

    def test_advisory_report_uses_estimates(
        self, small_model: Classifier, rng: RandomSource
    ) -> None:
        """Test that an advisory check reports the seeded sampled estimates."""
        operator = JpegOperator(50)
        x = rng.uniform((8, 8))
        y = int(np.argmax(forward(small_model, operator(x))))
        report = check_radius_bound(small_model, operator, x, y, probes=4, seed=9, steps=50)
        probes = RandomSource(9)
        z = operator(x)

        assert report.advisory
        assert report.lipschitz_c == estimate_operator_lipschitz(operator, x, 4, probes.child(0))
        assert report.lipschitz_f == estimate_classifier_lipschitz(
            small_model, z, y, 4, probes.child(1)
        )

    def test_misclassified_compressed_input(
        self, linear_model: Classifier, rng: RandomSource
    ) -> None:
        """Test that a non-positive m(C(x)) raises PreconditionError."""
        x = rng.uniform((8, 8))
        wrong = (int(np.argmax(forward(linear_model, x))) + 1) % 3

        with pytest.raises(PreconditionError):
            check_radius_bound(linear_model, IdentityOperator(), x, wrong)
