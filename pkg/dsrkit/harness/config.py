"""Experiment configuration.

Settings start from a YAML preset (see :mod:`dsrkit.templates`) and are
overridden by a user file and then by command-line values. User files are
either YAML (``.yaml``/``.yml``) or the line-oriented text format::

    # comment
    seed = 7
    attack.pgd.iters = 5
    sweep.qualities = 95, 50, 10

Both forms reduce to the same flat mapping of dotted keys. A key that the
base preset does not define is an error.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from dsrkit.classifier.trainer import TrainingConfig
from dsrkit.compression.operators import OPERATOR_KINDS
from dsrkit.errors import ConfigError
from dsrkit.harness.dataset import DatasetSpec
from dsrkit.models import AttackKind, PipelineOrder
from dsrkit.numerics.random import mix_seed
from dsrkit.templates.selector import BASE_PRESET, preset_settings, select_preset

logger = logging.getLogger(__name__)

QualityToken = int | str
IDENTITY_QUALITY = "identity"
YAML_SUFFIXES = (".yaml", ".yml")

_KEY_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_ATTACK_TOKENS = {"fgsm": AttackKind.FGSM, "pgd": AttackKind.PGD}
_OPERATOR_TOKENS = {
    "identity": "identity",
    "jpeg": "jpeg",
    "pca": "pca",
    "patchsvd": "patch_svd",
    "patch_svd": "patch_svd",
}
_TRUE = ("true", "yes", "on", "1")
_FALSE = ("false", "no", "off", "0")
_NONE = ("none", "null", "~", "")


@dataclass(frozen=True)
class RowPlan:
    """Parsed attack-table row name such as ``JPEG->PGD``."""

    label: str
    order: PipelineOrder
    operator: str | None
    attack: AttackKind | None


def parse_row(label: str) -> RowPlan:
    """Interpret a table row name.

    ``FGSM`` and ``PGD`` alone are attack-only rows, an operator name alone
    (``JPEG``, ``PCA``, ``PatchSVD``, ``identity``) is compress-only,
    ``OP->ATTACK`` attacks the compressed image and ``ATTACK->OP`` compresses
    the attacked image.

    Raises:
        ConfigError: If the name is not one of these forms

    Example:
        >>> parse_row("JPEG->PGD").order.value
        'compress_then_attack'
    """
    parts = [part.strip().lower() for part in label.split("->")]
    if len(parts) == 1:
        (token,) = parts
        if token in _ATTACK_TOKENS:
            return RowPlan(label, PipelineOrder.ATTACK_ONLY, None, _ATTACK_TOKENS[token])
        if token in _OPERATOR_TOKENS:
            return RowPlan(label, PipelineOrder.COMPRESS_ONLY, _OPERATOR_TOKENS[token], None)
    elif len(parts) == 2:
        first, second = parts
        if first in _OPERATOR_TOKENS and second in _ATTACK_TOKENS:
            return RowPlan(
                label,
                PipelineOrder.COMPRESS_THEN_ATTACK,
                _OPERATOR_TOKENS[first],
                _ATTACK_TOKENS[second],
            )
        if first in _ATTACK_TOKENS and second in _OPERATOR_TOKENS:
            return RowPlan(
                label,
                PipelineOrder.ATTACK_THEN_COMPRESS,
                _OPERATOR_TOKENS[second],
                _ATTACK_TOKENS[first],
            )
    raise ConfigError(f"cannot interpret table row '{label}'")


def quality_label(token: QualityToken) -> str:
    """Text used for a quality token in tables and CSV files."""
    return IDENTITY_QUALITY if token == IDENTITY_QUALITY else str(int(token))


def _quality_problems(name: str, tokens: list[QualityToken]) -> list[str]:
    """Messages for an empty quality list or entries outside 1..100."""
    errors = []
    if not tokens:
        errors.append(f"{name} must not be empty")
    for token in tokens:
        if token == IDENTITY_QUALITY:
            continue
        if isinstance(token, bool) or not isinstance(token, int) or not 1 <= token <= 100:
            errors.append(f"{name} entry {token!r} must be 1..100 or '{IDENTITY_QUALITY}'")
    return errors


@dataclass
class AttackSettings:
    """Attack hyperparameters shared by all experiments."""

    fgsm_epsilon: float = 0.01
    pgd_epsilon: float = 2.0 / 255.0
    pgd_alpha: float = 1.0 / 255.0
    pgd_iters: int = 5
    pgd_random_start: bool = True
    composed_pgd_iters: int = 10


@dataclass
class CompressionSettings:
    """Operator parameters; composed values apply when an attack is also in the row."""

    jpeg_quality: int = 25
    jpeg_composed_quality: int = 55
    pca_components: int = 22
    pca_composed_components: int = 50
    patch: int = 8
    rank: int = 3


@dataclass
class SweepSpec:
    """Quality sweep of the decision-space metrics."""

    qualities: list[QualityToken] = field(default_factory=lambda: [95, 75, 50, 30, 10])
    seeds: int = 50
    radius: float = 0.35
    resolution: int = 61


@dataclass
class OrderSpec:
    """Matched operator and budget for the operation-order experiment."""

    operator: str = "jpeg"
    quality: int = 55
    epsilon: float = 0.02


@dataclass
class AblationSpec:
    """Budgets for the epsilon ablation."""

    epsilons: list[float] = field(default_factory=lambda: [0.02, 0.04, 0.06, 0.08])
    pgd_iters: int = 10


@dataclass
class RadiusStudySpec:
    """Qualities and seed count for the robust-radius study."""

    qualities: list[QualityToken] = field(default_factory=lambda: [95, 75, 50, 30, 10])
    seeds: int = 50


@dataclass
class ExperimentConfig:
    """Everything an experiment run depends on.

    All randomness derives from ``seed``: the dataset (unless
    ``dataset_seed`` is set), weight initialization and shuffling, PGD
    random starts, plane directions and Lipschitz probes each use their own
    child seed. ``preset`` names the preset the settings were layered over
    and picks the report template.
    """

    seed: int = 0
    output_dir: Path = Path("results")
    preset: str = BASE_PRESET
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    dataset_seed: int | None = None
    hidden: tuple[int, ...] = (64, 64)
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.02
    attack: AttackSettings = field(default_factory=AttackSettings)
    compression: CompressionSettings = field(default_factory=CompressionSettings)
    table_rows: list[str] = field(default_factory=list)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    order: OrderSpec = field(default_factory=OrderSpec)
    ablation: AblationSpec = field(default_factory=AblationSpec)
    radius: RadiusStudySpec = field(default_factory=RadiusStudySpec)

    @property
    def generator_seed(self) -> int:
        return self.dataset_seed if self.dataset_seed is not None else mix_seed(self.seed, 0)

    @property
    def attack_seed(self) -> int:
        return mix_seed(self.seed, 2)

    @property
    def plane_seed(self) -> int:
        return mix_seed(self.seed, 3)

    @property
    def probe_seed(self) -> int:
        return mix_seed(self.seed, 4)

    def training_config(self) -> TrainingConfig:
        """Optimizer settings with the training child seed."""
        return TrainingConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=mix_seed(self.seed, 1),
            hidden=tuple(self.hidden),
        )

    def row_plans(self) -> list[RowPlan]:
        """Parsed attack-table rows.

        Raises:
            ConfigError: If a row name cannot be interpreted
        """
        return [parse_row(label) for label in self.table_rows]

    def validate(self) -> list[str]:
        """Validate every section against the preconditions of the operations it feeds.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []

        if self.seed < 0:
            errors.append(f"seed must be >= 0, got {self.seed}")
        if self.dataset_seed is not None and self.dataset_seed < 0:
            errors.append(f"dataset.seed must be >= 0, got {self.dataset_seed}")
        errors.extend(f"dataset: {e}" for e in self.dataset.validate())
        errors.extend(f"model: {e}" for e in self.training_config().validate())

        attack = self.attack
        for name, eps in (("fgsm", attack.fgsm_epsilon), ("pgd", attack.pgd_epsilon)):
            if not math.isfinite(eps) or eps < 0.0:
                errors.append(f"attack.{name}.epsilon must be finite and >= 0, got {eps}")
        if not attack.pgd_alpha > 0.0:
            errors.append(f"attack.pgd.alpha must be > 0, got {attack.pgd_alpha}")
        if attack.pgd_iters < 1 or attack.composed_pgd_iters < 1:
            errors.append("attack PGD iteration counts must be >= 1")

        comp = self.compression
        for name, quality in (
            ("jpeg.quality", comp.jpeg_quality),
            ("jpeg.composed_quality", comp.jpeg_composed_quality),
            ("order.quality", self.order.quality),
        ):
            if not 1 <= quality <= 100:
                errors.append(f"{name} must lie in 1..100, got {quality}")
        d = self.dataset.image_size**2
        total = self.dataset.num_classes * self.dataset.per_class
        n_train = int(round(self.dataset.train_fraction * total))
        limit = min(d, n_train)
        for name, k in (
            ("pca.components", comp.pca_components),
            ("pca.composed_components", comp.pca_composed_components),
        ):
            if not 1 <= k <= limit:
                errors.append(f"compression.{name} must lie in 1..{limit}, got {k}")
        if comp.patch < 1 or not 1 <= comp.rank <= comp.patch:
            errors.append(
                f"patch_svd needs patch >= 1 and 1 <= rank <= patch, got {comp.patch}/{comp.rank}"
            )

        for label in self.table_rows:
            try:
                parse_row(label)
            except ConfigError as e:
                errors.append(f"table.rows: {e}")

        sweep = self.sweep
        errors.extend(_quality_problems("sweep.qualities", sweep.qualities))
        if sweep.seeds < 1:
            errors.append(f"sweep.seeds must be >= 1, got {sweep.seeds}")
        if not sweep.radius > 0.0:
            errors.append(f"sweep.radius must be > 0, got {sweep.radius}")
        if sweep.resolution < 1 or sweep.resolution % 2 == 0:
            errors.append(f"sweep.resolution must be a positive odd count, got {sweep.resolution}")

        if self.order.operator not in OPERATOR_KINDS:
            errors.append(f"order.operator must be one of {', '.join(OPERATOR_KINDS)}")
        if not math.isfinite(self.order.epsilon) or self.order.epsilon < 0.0:
            errors.append(f"order.epsilon must be finite and >= 0, got {self.order.epsilon}")

        if not self.ablation.epsilons:
            errors.append("ablation.epsilons must not be empty")
        if any(not math.isfinite(e) or e < 0.0 for e in self.ablation.epsilons):
            errors.append("ablation.epsilons must be finite and >= 0")
        if self.ablation.pgd_iters < 1:
            errors.append(f"ablation.pgd_iters must be >= 1, got {self.ablation.pgd_iters}")

        errors.extend(_quality_problems("radius.qualities", self.radius.qualities))
        if self.radius.seeds < 1:
            errors.append(f"radius.seeds must be >= 1, got {self.radius.seeds}")

        return errors

    def is_valid(self) -> bool:
        """Check if the configuration is valid."""
        return len(self.validate()) == 0

    @classmethod
    def from_flat(cls, values: dict[str, Any], preset: str = BASE_PRESET) -> ExperimentConfig:
        """Build a configuration from a complete flat mapping of dotted keys.

        Raises:
            ConfigError: If a key is missing or a value has the wrong type
        """
        get = _Getter(values)
        return cls(
            seed=get.integer("seed"),
            output_dir=Path(get.text("output_dir")),
            preset=preset,
            dataset=DatasetSpec(
                image_size=get.integer("dataset.image_size"),
                num_classes=get.integer("dataset.num_classes"),
                per_class=get.integer("dataset.per_class"),
                noise_sigma=get.number("dataset.noise_sigma"),
                train_fraction=get.number("dataset.train_fraction"),
            ),
            dataset_seed=get.optional_integer("dataset.seed"),
            hidden=tuple(get.integers("model.hidden")),
            epochs=get.integer("model.epochs"),
            batch_size=get.integer("model.batch_size"),
            learning_rate=get.number("model.learning_rate"),
            attack=AttackSettings(
                fgsm_epsilon=get.number("attack.fgsm.epsilon"),
                pgd_epsilon=get.number("attack.pgd.epsilon"),
                pgd_alpha=get.number("attack.pgd.alpha"),
                pgd_iters=get.integer("attack.pgd.iters"),
                pgd_random_start=get.flag("attack.pgd.random_start"),
                composed_pgd_iters=get.integer("attack.composed_pgd.iters"),
            ),
            compression=CompressionSettings(
                jpeg_quality=get.integer("compression.jpeg.quality"),
                jpeg_composed_quality=get.integer("compression.jpeg.composed_quality"),
                pca_components=get.integer("compression.pca.components"),
                pca_composed_components=get.integer("compression.pca.composed_components"),
                patch=get.integer("compression.patch_svd.patch"),
                rank=get.integer("compression.patch_svd.rank"),
            ),
            table_rows=[str(row) for row in get.items("table.rows")],
            sweep=SweepSpec(
                qualities=get.qualities("sweep.qualities"),
                seeds=get.integer("sweep.seeds"),
                radius=get.number("sweep.radius"),
                resolution=get.integer("sweep.resolution"),
            ),
            order=OrderSpec(
                operator=get.text("order.operator"),
                quality=get.integer("order.quality"),
                epsilon=get.number("order.epsilon"),
            ),
            ablation=AblationSpec(
                epsilons=get.numbers("ablation.epsilons"),
                pgd_iters=get.integer("ablation.pgd_iters"),
            ),
            radius=RadiusStudySpec(
                qualities=get.qualities("radius.qualities"),
                seeds=get.integer("radius.seeds"),
            ),
        )


class _Getter:
    """Typed access to a flat mapping; every failure becomes a ConfigError."""

    def __init__(self, values: dict[str, Any]) -> None:
        self.values = values

    def _raw(self, key: str) -> Any:
        if key not in self.values:
            raise ConfigError(f"missing configuration key '{key}'")
        return self.values[key]

    def integer(self, key: str) -> int:
        value = self._raw(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}")
        return value

    def optional_integer(self, key: str) -> int | None:
        value = self._raw(key)
        return None if value is None else self.integer(key)

    def number(self, key: str) -> float:
        value = self._raw(key)
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ConfigError(f"'{key}' must be a number, got {value!r}")
        return float(value)

    def flag(self, key: str) -> bool:
        value = self._raw(key)
        if not isinstance(value, bool):
            raise ConfigError(f"'{key}' must be true or false, got {value!r}")
        return value

    def text(self, key: str) -> str:
        value = self._raw(key)
        if not isinstance(value, str):
            raise ConfigError(f"'{key}' must be a string, got {value!r}")
        return value

    def items(self, key: str) -> list[Any]:
        value = self._raw(key)
        if not isinstance(value, list):
            raise ConfigError(f"'{key}' must be a list, got {value!r}")
        return value

    def integers(self, key: str) -> list[int]:
        values = self.items(key)
        for item in values:
            if isinstance(item, bool) or not isinstance(item, int):
                raise ConfigError(f"'{key}' entry {item!r} is not an integer")
        return list(values)

    def numbers(self, key: str) -> list[float]:
        values = self.items(key)
        for item in values:
            if isinstance(item, bool) or not isinstance(item, int | float):
                raise ConfigError(f"'{key}' entry {item!r} is not a number")
        return [float(item) for item in values]

    def qualities(self, key: str) -> list[QualityToken]:
        tokens: list[QualityToken] = []
        for item in self.items(key):
            if isinstance(item, str) and item.strip().lower() == IDENTITY_QUALITY:
                tokens.append(IDENTITY_QUALITY)
            elif isinstance(item, int) and not isinstance(item, bool):
                tokens.append(item)
            else:
                raise ConfigError(f"'{key}' entry {item!r} is not a quality or 'identity'")
        return tokens


def flatten(mapping: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    """Flatten nested mappings into dotted keys; lists stay values.

    Example:
        >>> flatten({"attack": {"pgd": {"iters": 5}}, "seed": 1})
        {'attack.pgd.iters': 5, 'seed': 1}
    """
    flat: dict[str, Any] = {}
    for key, value in mapping.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, prefix=f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def parse_config_text(text: str) -> dict[str, str]:
    """Parse the ``key = value`` format into raw string values.

    Raises:
        ConfigError: On a line without '=', a malformed key or a repeated key
    """
    values: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {number}: expected 'key = value', got '{content}'")
        key, raw = (part.strip() for part in content.split("=", 1))
        if not _KEY_PATTERN.match(key):
            raise ConfigError(f"line {number}: malformed key '{key}'")
        if key in values:
            raise ConfigError(f"line {number}: key '{key}' given twice")
        values[key] = raw
    return values


def _parse_scalar(raw: str) -> Any:
    """Quoted text, int, float or an a/b fraction; anything else stays a string."""
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return float(num) / float(den)
        except (ValueError, ZeroDivisionError):
            pass
    return text


def coerce_value(key: str, raw: Any, default: Any) -> Any:
    """Convert a user value to the type of the preset default for ``key``.

    Strings come from the text format and are parsed; YAML values are only
    widened (int to float) or checked.

    Raises:
        ConfigError: If the value cannot represent the expected type
    """
    if isinstance(raw, str):
        text = raw.strip()
        if isinstance(default, bool):
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ConfigError(f"'{key}' must be true or false, got '{raw}'")
        if isinstance(default, list):
            inner = text[1:-1] if text.startswith("[") and text.endswith("]") else text
            return [_parse_scalar(item) for item in inner.split(",") if item.strip()]
        if default is None and text.lower() in _NONE:
            return None
        if isinstance(default, str):
            return _parse_scalar(text) if text[:1] in "\"'" else text
        raw = _parse_scalar(text)

    if isinstance(default, float) and isinstance(raw, int) and not isinstance(raw, bool):
        return float(raw)
    if isinstance(default, list) and not isinstance(raw, list):
        return [raw]
    if default is None or raw is None or isinstance(raw, type(default)):
        return raw
    raise ConfigError(
        f"'{key}' expects {type(default).__name__}, got {type(raw).__name__} {raw!r}"
    )


def read_config_file(path: Path) -> dict[str, Any]:
    """Read a user config file into a flat mapping.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If the file cannot be parsed
    """
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid UTF-8: {e}") from e
    if path.suffix.lower() not in YAML_SUFFIXES:
        return dict(parse_config_text(text))
    try:
        loaded = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse YAML in {path}: {e}") from e
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"Invalid config format in {path}: expected mapping")
    return flatten(loaded)


def apply_values(
    base: dict[str, Any], values: dict[str, Any], source: str
) -> dict[str, Any]:
    """Overlay user values on a flat preset mapping, rejecting unknown keys."""
    merged = dict(base)
    for key, raw in values.items():
        if key not in base:
            raise ConfigError(f"unknown configuration key '{key}' in {source}")
        merged[key] = coerce_value(key, raw, base[key])
    return merged


def load_config(
    path: Path | None = None,
    preset: str = BASE_PRESET,
    overrides: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Build and validate an experiment configuration.

    Args:
        path: Optional user config file (YAML or ``key = value`` text)
        preset: Preset the user values are layered over
        overrides: Final values, typically from command-line flags

    Returns:
        Validated configuration

    Raises:
        ConfigError: If any key is unknown or any value is invalid

    Example:
        >>> config = load_config(preset="smoke", overrides={"seed": 3})
        >>> config.seed, config.dataset.image_size, config.preset
        (3, 8, 'quick')
    """
    flat = flatten(preset_settings(preset))
    if path is not None:
        flat = apply_values(flat, read_config_file(path), str(path))
        logger.info("Loaded configuration from %s", path)
    if overrides:
        flat = apply_values(flat, overrides, "command-line options")

    config = ExperimentConfig.from_flat(flat, preset=select_preset(preset).name)
    problems = config.validate()
    if problems:
        raise ConfigError("invalid configuration: " + "; ".join(problems))
    return config
