"""Markdown summary of a suite run, rendered from a Jinja2 template."""

import logging
from pathlib import Path
from typing import Any

from jinja2 import Environment, FileSystemLoader, TemplateNotFound

logger = logging.getLogger(__name__)

REPORT_TEMPLATE = "report.md.j2"


def _get_templates_dir() -> Path:
    return Path(__file__).parent.parent / "templates"


def _create_jinja_env() -> Environment:
    loader = FileSystemLoader(str(_get_templates_dir()))
    return Environment(loader=loader, keep_trailing_newline=True)


def render_report(output_path: Path, preset: str = "base", **template_vars: Any) -> Path:
    """Render the run report.

    Presets without their own ``report.md.j2`` use the base one.

    Args:
        output_path: Destination markdown file
        preset: Preset whose template is preferred
        **template_vars: Values referenced by the template

    Returns:
        The written path

    Raises:
        FileNotFoundError: If no report template exists
        ValueError: If rendering fails
    """
    env = _create_jinja_env()
    try:
        template = env.select_template([f"{preset}/{REPORT_TEMPLATE}", f"base/{REPORT_TEMPLATE}"])
    except TemplateNotFound as e:
        raise FileNotFoundError(f"Report template {REPORT_TEMPLATE} not found") from e

    try:
        rendered = template.render(**template_vars)
    except Exception as e:
        raise ValueError(f"Failed to render report: {e}") from e

    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(rendered, encoding="utf-8")
    logger.info("Wrote %s", output_path)
    return output_path
