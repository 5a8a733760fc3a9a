"""CSV tables and PPM/PGM heatmaps.

CSV files have a header row, comma separators, LF line endings and numbers
written with 6 significant digits. A heatmap is three files sharing a stem:
``<stem>.ppm`` (P6 label map, palette colour ``label % 10``), ``<stem>.pgm``
(P5 margin map, min-max normalized) and ``<stem>.csv`` (the min and max
used for normalization).
"""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from dsrkit.models import EpsilonRow, PlaneGrid, RadiusRow, ResultRow, SweepResult

logger = logging.getLogger(__name__)

# tab10
PALETTE: tuple[tuple[int, int, int], ...] = (
    (0x1F, 0x77, 0xB4),
    (0xFF, 0x7F, 0x0E),
    (0x2C, 0xA0, 0x2C),
    (0xD6, 0x27, 0x28),
    (0x94, 0x67, 0xBD),
    (0x8C, 0x56, 0x4B),
    (0xE3, 0x77, 0xC2),
    (0x7F, 0x7F, 0x7F),
    (0xBC, 0xBD, 0x22),
    (0x17, 0xBE, 0xCF),
)

RESULT_HEADER = ("label", "accuracy", "psnr", "count")
SWEEP_HEADER = ("quality", "metric", "mean", "std")
RADIUS_HEADER = ("quality", "mean_radius", "std_radius", "mean_margin")

CsvPayload = Sequence[ResultRow] | Sequence[EpsilonRow] | Sequence[RadiusRow] | SweepResult


def format_number(value: float) -> str:
    """Six significant digits, '.' decimal separator.

    Example:
        >>> format_number(2 / 3), format_number(100.0)
        ('0.666667', '100')
    """
    return f"{value:.6g}"


def _cell(value: Any) -> str:
    """Format one CSV cell: lowercase booleans, plain integers, 6-digit floats."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return format_number(float(value))
    return str(value)


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Render rows as CSV text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _table(payload: CsvPayload) -> tuple[tuple[str, ...], list[list[Any]]]:
    """Header and rows for a sweep result or a non-empty list of table rows."""
    if isinstance(payload, SweepResult):
        if not payload.rows:
            raise ValueError("cannot emit an empty sweep")
        return SWEEP_HEADER, [[r.quality, r.metric, r.mean, r.std] for r in payload.rows]

    rows = list(payload)
    if not rows:
        raise ValueError("cannot emit an empty table")
    first = rows[0]
    if isinstance(first, ResultRow):
        return RESULT_HEADER, [[r.label, r.accuracy, r.psnr, r.count] for r in rows]
    if isinstance(first, RadiusRow):
        return RADIUS_HEADER, [
            [r.quality, r.mean_radius, r.std_radius, r.mean_margin] for r in rows
        ]
    if isinstance(first, EpsilonRow):
        header = ("label", *(f"eps={format_number(e)}" for e in first.epsilons))
        return header, [[r.label, *r.accuracies] for r in rows]
    raise ValueError(f"cannot emit rows of type {type(first).__name__}")


def emit_csv(payload: CsvPayload, path: Path) -> Path:
    """Write result rows, sweep aggregates, ablation rows or radius rows as CSV.

    Args:
        payload: Rows of a single kind, or a sweep result
        path: Destination file; parent directories are created

    Returns:
        The written path

    Raises:
        ValueError: If the payload is empty or of an unknown kind
        OSError: If the file cannot be written
    """
    header, rows = _table(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows), encoding="utf-8", newline="")
    logger.info("Wrote %s", path)
    return path


def label_image(labels: np.ndarray) -> bytes:
    """P6 image of a label grid."""
    rows, cols = labels.shape
    colours = np.array(PALETTE, dtype=np.uint8)[np.mod(labels, len(PALETTE))]
    return f"P6\n{cols} {rows}\n255\n".encode("ascii") + colours.tobytes()


def margin_image(margins: np.ndarray) -> tuple[bytes, float, float]:
    """P5 image of a margin grid with ``floor(255 * (m - min) / (max - min) + 0.5)``.

    A constant grid maps to 255 everywhere.

    Returns:
        ``(pgm_bytes, min, max)``
    """
    rows, cols = margins.shape
    low = float(np.min(margins))
    high = float(np.max(margins))
    if high == low:
        levels = np.full(margins.shape, 255, dtype=np.uint8)
    else:
        scaled = np.floor(255.0 * (margins - low) / (high - low) + 0.5)
        levels = np.clip(scaled, 0, 255).astype(np.uint8)
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + levels.tobytes(), low, high


def emit_heatmap(grid: PlaneGrid, stem: Path) -> tuple[Path, Path, Path]:
    """Write the label map, the margin map and the margin range sidecar.

    Args:
        grid: Evaluated plane
        stem: Path without suffix; ``.ppm``, ``.pgm`` and ``.csv`` are appended

    Returns:
        Paths of the PPM, PGM and sidecar CSV files

    Raises:
        ValueError: If the grid is empty or malformed
        OSError: If a file cannot be written
    """
    problems = grid.validate()
    if problems:
        raise ValueError("invalid grid: " + "; ".join(problems))
    if grid.labels.size == 0:
        raise ValueError("cannot emit an empty grid")

    stem.parent.mkdir(parents=True, exist_ok=True)
    ppm_path = stem.with_name(stem.name + ".ppm")
    pgm_path = stem.with_name(stem.name + ".pgm")
    range_path = stem.with_name(stem.name + ".csv")

    pgm, low, high = margin_image(grid.margins)
    ppm_path.write_bytes(label_image(grid.labels))
    pgm_path.write_bytes(pgm)
    range_path.write_text(csv_text(("min", "max"), [(low, high)]), encoding="utf-8", newline="")
    logger.info("Wrote heatmap %s.{ppm,pgm,csv}", stem)
    return ppm_path, pgm_path, range_path
