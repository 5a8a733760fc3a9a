"""Preset discovery, selection and loading.

A preset is a directory next to this module containing a ``config.yaml``
with ``name``, ``description``, ``version`` and a ``settings`` mapping.
Every preset is layered over ``base``.
"""

from pathlib import Path
from typing import Any

import yaml

from dsrkit.errors import ConfigError

BASE_PRESET = "base"
REQUIRED_FIELDS = ("name", "description", "version", "settings")


def list_presets() -> list[str]:
    """List all available preset names.

    Returns:
        Sorted preset directory names

    Example:
        >>> "quick" in list_presets()
        True
    """
    presets = []
    for path in _get_templates_dir().iterdir():
        if path.is_dir() and not path.name.startswith("_") and (path / "config.yaml").exists():
            presets.append(path.name)
    return sorted(presets)


def select_preset(name: str) -> Path:
    """Find the preset directory for a name or one of its aliases.

    Args:
        name: Preset name, case-insensitive (e.g. "quick", "smoke")

    Returns:
        Path to the preset directory

    Raises:
        ConfigError: If no preset matches
    """
    wanted = name.lower().strip()
    templates_dir = _get_templates_dir()

    for preset in list_presets():
        path = templates_dir / preset
        config = load_preset_config(path)
        aliases = [str(alias).lower() for alias in config.get("aliases", [])]
        if wanted == preset or wanted in aliases:
            return path

    raise ConfigError(f"unknown preset '{name}', available: {', '.join(list_presets())}")


def load_preset_config(preset_path: Path) -> dict[str, Any]:
    """Load and check a preset's config.yaml.

    Raises:
        FileNotFoundError: If config.yaml doesn't exist
        ConfigError: If the file is not valid YAML or misses required fields
    """
    config_path = preset_path / "config.yaml"
    if not config_path.exists():
        raise FileNotFoundError(f"Preset config not found: {config_path}")

    try:
        with config_path.open("r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse YAML in {config_path}: {e}") from e

    if not isinstance(config, dict):
        raise ConfigError(f"Invalid config format in {config_path}: expected mapping")
    missing = [field for field in REQUIRED_FIELDS if field not in config]
    if missing:
        raise ConfigError(f"Missing required fields in {config_path}: {', '.join(missing)}")
    if not isinstance(config["settings"], dict):
        raise ConfigError(f"'settings' in {config_path} must be a mapping")
    return config


def preset_settings(name: str = BASE_PRESET) -> dict[str, Any]:
    """Nested settings of a preset layered over the base preset."""
    base = load_preset_config(_get_templates_dir() / BASE_PRESET)["settings"]
    path = select_preset(name)
    if path.name == BASE_PRESET:
        return dict(base)
    return _merge(base, load_preset_config(path)["settings"])


def _merge(base: dict[str, Any], overlay: dict[str, Any]) -> dict[str, Any]:
    """Recursive merge; overlay values win, nested mappings are merged key by key."""
    merged = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _get_templates_dir() -> Path:
    return Path(__file__).parent
