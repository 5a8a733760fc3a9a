"""Tests for experiment configuration loading."""

from pathlib import Path

import pytest

from dsrkit.errors import ConfigError
from dsrkit.harness.config import (
    IDENTITY_QUALITY,
    ExperimentConfig,
    coerce_value,
    flatten,
    load_config,
    parse_config_text,
    parse_row,
    quality_label,
    read_config_file,
)
from dsrkit.models import AttackKind, PipelineOrder
from dsrkit.numerics import mix_seed


class TestParseRow:
    """Tests for attack-table row names."""

    @pytest.mark.parametrize(
        ("label", "order", "operator", "attack"),
        [
            ("FGSM", PipelineOrder.ATTACK_ONLY, None, AttackKind.FGSM),
            ("pgd", PipelineOrder.ATTACK_ONLY, None, AttackKind.PGD),
            ("JPEG", PipelineOrder.COMPRESS_ONLY, "jpeg", None),
            ("PatchSVD", PipelineOrder.COMPRESS_ONLY, "patch_svd", None),
            ("PCA->PGD", PipelineOrder.COMPRESS_THEN_ATTACK, "pca", AttackKind.PGD),
            ("FGSM->JPEG", PipelineOrder.ATTACK_THEN_COMPRESS, "jpeg", AttackKind.FGSM),
            ("identity -> fgsm", PipelineOrder.COMPRESS_THEN_ATTACK, "identity", AttackKind.FGSM),
        ],
    )
    def test_forms(
        self,
        label: str,
        order: PipelineOrder,
        operator: str | None,
        attack: AttackKind | None,
    ) -> None:
        """Test every supported row form."""
        plan = parse_row(label)

        assert plan.label == label
        assert plan.order == order
        assert plan.operator == operator
        assert plan.attack == attack

    @pytest.mark.parametrize("label", ["", "WEBP", "JPEG->PCA", "FGSM->PGD", "A->B->C"])
    def test_rejected(self, label: str) -> None:
        """Test that unknown row names raise ConfigError."""
        with pytest.raises(ConfigError):
            parse_row(label)

    def test_quality_label(self) -> None:
        """Test labels of quality tokens."""
        assert quality_label(50) == "50"
        assert quality_label(IDENTITY_QUALITY) == "identity"


class TestTextFormat:
    """Tests for the key = value file format."""

    def test_parse(self) -> None:
        """Test comments, blank lines and whitespace handling."""
        text = "# header\n\nseed = 7   # trailing\nattack.pgd.iters=3\n"

        assert parse_config_text(text) == {"seed": "7", "attack.pgd.iters": "3"}

    def test_missing_equals(self) -> None:
        """Test that a line without '=' raises ConfigError with its number."""
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("seed = 1\nnonsense\n")

    def test_malformed_key(self) -> None:
        """Test that keys with spaces or leading digits are rejected."""
        with pytest.raises(ConfigError, match="malformed key"):
            parse_config_text("bad key = 1\n")
        with pytest.raises(ConfigError):
            parse_config_text("1seed = 1\n")

    def test_duplicate_key(self) -> None:
        """Test that a repeated key raises ConfigError."""
        with pytest.raises(ConfigError, match="twice"):
            parse_config_text("seed = 1\nseed = 2\n")

    def test_flatten(self) -> None:
        """Test that nested mappings become dotted keys and lists stay values."""
        assert flatten({"a": {"b": 1, "c": [1, 2]}, "d": None}) == {
            "a.b": 1,
            "a.c": [1, 2],
            "d": None,
        }


class TestCoerceValue:
    """Tests for typing user values after the preset defaults."""

    def test_text_values(self) -> None:
        """Test conversion of raw strings to the default's type."""
        assert coerce_value("seed", "12", 0) == 12
        assert coerce_value("eps", "0.5", 0.1) == 0.5
        assert coerce_value("eps", "2/255", 0.1) == pytest.approx(2 / 255)
        assert coerce_value("flag", "yes", True) is True
        assert coerce_value("flag", "off", True) is False
        assert coerce_value("rows", "95, 50, identity", [1]) == [95, 50, "identity"]
        assert coerce_value("rows", "[0.02, 0.04]", [0.1]) == [0.02, 0.04]
        assert coerce_value("seed", "none", None) is None
        assert coerce_value("name", "pca", "jpeg") == "pca"

    def test_yaml_values(self) -> None:
        """Test widening and checking of already typed values."""
        assert coerce_value("eps", 1, 0.1) == 1.0
        assert isinstance(coerce_value("eps", 1, 0.1), float)
        assert coerce_value("qualities", 50, [95]) == [50]

    def test_type_mismatch(self) -> None:
        """Test that incompatible values raise ConfigError."""
        with pytest.raises(ConfigError):
            coerce_value("seed", "0.5", 0)
        with pytest.raises(ConfigError):
            coerce_value("flag", "maybe", False)
        with pytest.raises(ConfigError):
            coerce_value("seed", [1], 0)


class TestLoadConfig:
    """Tests for layered configuration loading."""

    def test_base_defaults(self) -> None:
        """Test the defaults of the base preset."""
        config = load_config()

        assert config.seed == 0
        assert config.preset == "base"
        assert config.dataset.image_size == 16
        assert config.hidden == (64, 64)
        assert config.attack.fgsm_epsilon == 0.01
        assert config.attack.pgd_epsilon == pytest.approx(2 / 255)
        assert config.attack.pgd_alpha == pytest.approx(1 / 255)
        assert config.attack.pgd_iters == 5
        assert config.compression.jpeg_quality == 25
        assert config.compression.pca_components == 22
        assert config.sweep.qualities == [95, 75, 50, 30, 10]
        assert config.sweep.resolution == 61
        assert config.table_rows[0] == "FGSM"
        assert len(config.row_plans()) == len(config.table_rows)
        assert config.is_valid()

    def test_quick_preset_overlays_base(self, quick_config: ExperimentConfig) -> None:
        """Test that the quick preset changes only what it names."""
        assert quick_config.preset == "quick"
        assert quick_config.dataset.image_size == 8
        assert quick_config.hidden == (16,)
        assert quick_config.sweep.seeds == 3
        assert quick_config.attack.fgsm_epsilon == 0.01

    def test_alias_records_canonical_preset(self) -> None:
        """Test that a preset alias is stored under its directory name."""
        assert load_config(preset="smoke").preset == "quick"

    def test_text_file(self, tmp_path: Path) -> None:
        """Test a key = value file layered over the preset."""
        path = tmp_path / "run.cfg"
        path.write_text("seed = 9\nsweep.qualities = 90, identity\nattack.pgd.alpha = 1/255\n")
        config = load_config(path, preset="quick")

        assert config.seed == 9
        assert config.sweep.qualities == [90, IDENTITY_QUALITY]
        assert config.attack.pgd_alpha == pytest.approx(1 / 255)

    def test_yaml_file(self, tmp_path: Path) -> None:
        """Test a nested YAML file."""
        path = tmp_path / "run.yaml"
        path.write_text("seed: 4\nablation:\n  epsilons: [0.0, 0.1]\n")
        config = load_config(path, preset="quick")

        assert config.seed == 4
        assert config.ablation.epsilons == [0.0, 0.1]

    def test_overrides_win(self, tmp_path: Path) -> None:
        """Test that overrides are applied after the file."""
        path = tmp_path / "run.cfg"
        path.write_text("seed = 9\n")

        assert load_config(path, preset="quick", overrides={"seed": 11}).seed == 11

    def test_unknown_key(self, tmp_path: Path) -> None:
        """Test that a key absent from the base preset raises ConfigError."""
        path = tmp_path / "run.cfg"
        path.write_text("attack.pgd.itres = 3\n")

        with pytest.raises(ConfigError, match="unknown configuration key"):
            load_config(path)

    def test_invalid_value(self) -> None:
        """Test that out-of-range values fail validation."""
        with pytest.raises(ConfigError, match="sweep.resolution"):
            load_config(preset="quick", overrides={"sweep.resolution": 10})
        with pytest.raises(ConfigError, match="pca"):
            load_config(preset="quick", overrides={"compression.pca.components": 65})
        with pytest.raises(ConfigError, match="sweep.qualities"):
            load_config(preset="quick", overrides={"sweep.qualities": [0]})

    def test_bad_yaml(self, tmp_path: Path) -> None:
        """Test that broken YAML raises ConfigError."""
        path = tmp_path / "run.yaml"
        path.write_text("seed: [unclosed\n")

        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that a missing config file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            read_config_file(tmp_path / "absent.cfg")

    def test_child_seeds(self) -> None:
        """Test that every consumer gets its own child of the master seed."""
        config = load_config(preset="quick", overrides={"seed": 5})
        seeds = {
            config.generator_seed,
            config.training_config().seed,
            config.attack_seed,
            config.plane_seed,
            config.probe_seed,
        }

        assert len(seeds) == 5
        assert config.generator_seed == mix_seed(5, 0)

    def test_explicit_dataset_seed(self) -> None:
        """Test that dataset.seed pins the generator independently of the master seed."""
        a = load_config(preset="quick", overrides={"seed": 1, "dataset.seed": 77})
        b = load_config(preset="quick", overrides={"seed": 2, "dataset.seed": 77})

        assert a.generator_seed == b.generator_seed == 77
        assert a.attack_seed != b.attack_seed
