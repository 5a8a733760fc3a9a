"""Tests for data models."""

import numpy as np
import pytest

from dsrkit.models import (
    AttackConfig,
    AttackKind,
    Classifier,
    DsrMetrics,
    LabeledDataset,
    PcaBasis,
    PipelineOrder,
    PipelineSpec,
    PlaneSpec,
    RadiusBoundReport,
    SweepResult,
    SweepRow,
)


class TestLabeledDataset:
    """Tests for the LabeledDataset dataclass."""

    def test_valid(self) -> None:
        """Test a small valid dataset."""
        ds = LabeledDataset(np.zeros((3, 8, 8)), np.array([0, 1, 1]), 2)

        assert len(ds) == 3
        assert ds.dimension == 64
        assert ds.flat().shape == (3, 64)
        assert ds.is_valid()

    def test_invalid(self) -> None:
        """Test label range, pixel range and class count checks."""
        ds = LabeledDataset(np.full((2, 4, 4), 1.5), np.array([0, 3]), 1)
        errors = ds.validate()

        assert any("num_classes" in e for e in errors)
        assert any("labels must lie" in e for e in errors)
        assert any("pixel values" in e for e in errors)

    def test_label_count_mismatch(self) -> None:
        """Test that labels must match the number of images."""
        ds = LabeledDataset(np.zeros((2, 4, 4)), np.array([0]), 2)

        assert not ds.is_valid()


class TestClassifier:
    """Tests for the Classifier dataclass."""

    def test_properties(self) -> None:
        """Test derived sizes."""
        model = Classifier(
            [np.zeros((5, 16)), np.zeros((3, 5))], [np.zeros(5), np.zeros(3)], (4, 4)
        )

        assert model.input_dim == 16
        assert model.num_classes == 3
        assert model.layer_sizes == [16, 5, 3]
        assert not model.is_linear
        assert model.is_valid()

    def test_copy_is_deep(self) -> None:
        """Test that copies do not share parameters."""
        model = Classifier([np.ones((2, 4))], [np.zeros(2)], (4,))
        clone = model.copy()
        clone.weights[0][0, 0] = 7.0

        assert model.weights[0][0, 0] == 1.0

    def test_shape_chain(self) -> None:
        """Test that mismatched layers are reported."""
        model = Classifier([np.zeros((5, 15))], [np.zeros(4)], (4, 4))
        errors = model.validate()

        assert any("fan_in" in e for e in errors)
        assert any("bias shape" in e for e in errors)

    def test_non_finite(self) -> None:
        """Test that NaN parameters are reported."""
        model = Classifier([np.full((2, 4), np.nan)], [np.zeros(2)], (4,))

        assert any("non-finite" in e for e in model.validate())

    def test_empty(self) -> None:
        """Test that a model needs a layer."""
        assert not Classifier([], [], (4,)).is_valid()


class TestAttackConfig:
    """Tests for the AttackConfig dataclass."""

    def test_defaults(self) -> None:
        """Test the default FGSM settings."""
        config = AttackConfig()

        assert config.kind == AttackKind.FGSM
        assert config.epsilon == 0.01
        assert config.is_valid()

    def test_pgd_requirements(self) -> None:
        """Test that PGD needs a positive step and at least one iteration."""
        config = AttackConfig(kind=AttackKind.PGD, alpha=0.0, iterations=0)

        assert len(config.validate()) == 2

    def test_fgsm_ignores_pgd_fields(self) -> None:
        """Test that FGSM does not check PGD-only fields."""
        assert AttackConfig(kind=AttackKind.FGSM, alpha=0.0, iterations=0).is_valid()

    @pytest.mark.parametrize("epsilon", [-0.1, float("nan"), float("inf")])
    def test_bad_epsilon(self, epsilon: float) -> None:
        """Test that negative or non-finite budgets are invalid."""
        assert not AttackConfig(epsilon=epsilon).is_valid()


class TestPipelineSpec:
    """Tests for the PipelineSpec dataclass."""

    def test_attack_only(self) -> None:
        """Test that attack-only rows need no operator."""
        spec = PipelineSpec("FGSM", PipelineOrder.ATTACK_ONLY, attack=AttackConfig())

        assert spec.is_valid()

    def test_missing_parts(self) -> None:
        """Test messages for a missing operator and attack."""
        spec = PipelineSpec("JPEG->FGSM", PipelineOrder.COMPRESS_THEN_ATTACK)
        errors = spec.validate()

        assert len(errors) == 2
        assert "needs an operator" in errors[0]
        assert "needs an attack" in errors[1]

    def test_nested_attack_errors(self) -> None:
        """Test that invalid attack settings are reported with the row label."""
        spec = PipelineSpec(
            "PGD", PipelineOrder.ATTACK_ONLY, attack=AttackConfig(AttackKind.PGD, alpha=0.0)
        )

        assert spec.validate()[0].startswith("pipeline 'PGD'")


class TestPlaneSpec:
    """Tests for the PlaneSpec dataclass."""

    def test_offsets(self) -> None:
        """Test symmetric offsets with an exact zero."""
        u = np.array([1.0, 0.0])
        v = np.array([0.0, 1.0])
        spec = PlaneSpec(np.zeros(2), 0, u, v, radius=1.0, resolution=5)

        assert spec.offsets.tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
        assert spec.is_valid()

    def test_single_point(self) -> None:
        """Test that resolution 1 samples only the center."""
        spec = PlaneSpec(np.zeros(2), 0, np.array([1.0, 0.0]), np.array([0.0, 1.0]), resolution=1)

        assert spec.offsets.tolist() == [0.0]

    def test_invalid(self) -> None:
        """Test non-orthogonal directions and an even resolution."""
        u = np.array([1.0, 0.0])
        spec = PlaneSpec(np.zeros(2), 0, u, u, radius=0.0, resolution=4)
        errors = spec.validate()

        assert any("orthogonal" in e for e in errors)
        assert any("radius" in e for e in errors)
        assert any("resolution" in e for e in errors)


class TestPcaBasis:
    """Tests for the PcaBasis dataclass."""

    def test_orthonormal_rows(self) -> None:
        """Test that orthonormal rows validate and others do not."""
        good = PcaBasis(np.zeros(3), np.eye(3)[:2], np.array([0.6, 0.4]), (3,))
        bad = PcaBasis(np.zeros(3), np.ones((2, 3)), np.array([0.6, 0.4]), (3,))

        assert good.k == 2
        assert good.is_valid()
        assert "components are not orthonormal" in bad.validate()


class TestDsrMetrics:
    """Tests for the DsrMetrics dataclass."""

    def test_as_dict_order(self) -> None:
        """Test that the mapping follows the metric name order."""
        metrics = DsrMetrics(area=0.5, mean_margin=0.2, intrusion=0.1, density=0.05)

        assert list(metrics.as_dict()) == list(DsrMetrics.METRIC_NAMES)
        assert metrics.as_dict()["density"] == 0.05


class TestRadiusBoundReport:
    """Tests for the RadiusBoundReport dataclass."""

    def test_advisory_is_not_certified(self) -> None:
        """Test that estimated constants make the report advisory."""
        report = RadiusBoundReport(0.1, 0.3, True, False, 2.0, 1.5, 0.3)

        assert report.advisory


class TestSweepResult:
    """Tests for the SweepResult container."""

    def test_value_lookup(self) -> None:
        """Test cell lookup and the missing-cell error."""
        result = SweepResult([SweepRow("50", "area", 0.4, 0.1)], seed_count=2)

        assert result.value("50", "area") == (0.4, 0.1)
        with pytest.raises(KeyError):
            result.value("50", "density")
