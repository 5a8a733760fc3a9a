"""Experiment presets and the run report template.

Each preset directory holds a ``config.yaml`` with the settings applied before
any user config file; ``base`` also carries ``report.md.j2``.
"""

from dsrkit.templates.selector import (
    list_presets,
    load_preset_config,
    preset_settings,
    select_preset,
)

__all__ = ["list_presets", "load_preset_config", "preset_settings", "select_preset"]
