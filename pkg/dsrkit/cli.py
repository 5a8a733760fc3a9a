"""Command-line interface for dsrkit.

This module provides the ``dsrkit`` entry point using the Click framework.
Exit codes: 0 on success, 2 on configuration errors (including click usage
errors), 3 on runtime errors.
"""

import functools
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar, cast

import click

from dsrkit import __version__
from dsrkit.classifier.checkpoint import read_checkpoint, write_checkpoint
from dsrkit.classifier.trainer import accuracy
from dsrkit.compression.operators import OPERATOR_KINDS
from dsrkit.errors import ConfigError, DsrError
from dsrkit.harness.config import IDENTITY_QUALITY, ExperimentConfig, QualityToken, load_config
from dsrkit.harness.dataset import generate_dataset, read_dataset, write_dataset
from dsrkit.harness.emit import emit_csv, emit_heatmap
from dsrkit.harness.experiments import (
    ExperimentSession,
    plane_grid,
    prepare_session,
    radius_bound_check,
    run_attack_table,
    run_epsilon_ablation,
    run_order_experiment,
    run_quality_sweep,
    run_radius_study,
    run_suite,
)
from dsrkit.models import LabeledDataset

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
TRAIN_FILE = "train.dsrdata"
TEST_FILE = "test.dsrdata"
MODEL_FILE = "model.ckpt"

F = TypeVar("F", bound=Callable[..., Any])


def handle_errors(func: F) -> F:
    """Map toolkit errors to exit codes 2 (configuration) and 3 (runtime)."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            click.echo(f"Configuration error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except (DsrError, OSError, ValueError, IndexError) as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_RUNTIME)

    return cast(F, wrapper)


def common_options(func: F) -> F:
    """Options shared by every experiment command."""
    func = click.option(
        "--preset",
        default="base",
        show_default=True,
        help="Preset the configuration is layered over",
    )(func)
    func = click.option(
        "--out",
        "out_dir",
        type=click.Path(file_okay=False, path_type=Path),
        default=None,
        help="Output directory (overrides output_dir)",
    )(func)
    func = click.option(
        "--seed",
        type=click.IntRange(0, 2**64 - 1),
        default=None,
        help="Master seed (overrides seed)",
    )(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        default=None,
        help="Config file (YAML or key = value lines)",
    )(func)
    return func


def session_options(func: F) -> F:
    """Options for reusing stored data and models."""
    func = click.option(
        "--model",
        "model_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        default=None,
        help="Checkpoint to evaluate instead of training a new model",
    )(func)
    func = click.option(
        "--data",
        "data_dir",
        type=click.Path(exists=True, file_okay=False, path_type=Path),
        default=None,
        help=f"Directory with {TRAIN_FILE} and {TEST_FILE} from gen-data",
    )(func)
    return func


def _load(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    extra: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Preset, then config file, then ``--seed`` and ``--out``."""
    overrides: dict[str, Any] = dict(extra or {})
    if seed is not None:
        overrides["seed"] = seed
    if out_dir is not None:
        overrides["output_dir"] = str(out_dir)
    return load_config(config_path, preset=preset, overrides=overrides)


def _read_splits(data_dir: Path) -> tuple[LabeledDataset, LabeledDataset]:
    return read_dataset(data_dir / TRAIN_FILE), read_dataset(data_dir / TEST_FILE)


def _session(
    config: ExperimentConfig, data_dir: Path | None, model_path: Path | None
) -> ExperimentSession:
    """Session over data and model files when given, generated and trained otherwise."""
    data = _read_splits(data_dir) if data_dir is not None else None
    model = read_checkpoint(model_path) if model_path is not None else None
    return prepare_session(config, data=data, model=model)


def _parse_quality(value: str | None) -> QualityToken | None:
    """Parse ``--quality``: an integer 1..100, the identity token, or nothing."""
    if value is None:
        return None
    if value.strip().lower() == IDENTITY_QUALITY:
        return IDENTITY_QUALITY
    try:
        quality = int(value)
    except ValueError as e:
        raise ConfigError(f"quality must be 1..100 or '{IDENTITY_QUALITY}', got '{value}'") from e
    if not 1 <= quality <= 100:
        raise ConfigError(f"quality must be 1..100, got {quality}")
    return quality


@click.group()
@click.version_option(version=__version__, prog_name="dsrkit")
@click.option(
    "--verbose",
    is_flag=True,
    help="Enable debug logging",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """dsrkit - Decision-space reduction under compression.

    Trains a small classifier on synthetic images, attacks it before and
    after lossy compression, and measures how compression shrinks the
    true-class region around each input.

    \b
    Examples:
        # Generate data and train a model
        dsrkit gen-data --out data
        dsrkit train --data data --out run

        # Run one experiment with a fast preset
        dsrkit dsr-sweep --preset quick --out run

        # Run everything and write report.md
        dsrkit suite --seed 7 --out run

    For more information on a specific command, use:
        dsrkit <command> --help
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose

    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger("dsrkit").setLevel(level)


@cli.command("gen-data")
@common_options
@handle_errors
def gen_data(
    config_path: Path | None, seed: int | None, out_dir: Path | None, preset: str
) -> None:
    """Generate the synthetic train and test splits."""
    config = _load(config_path, seed, out_dir, preset)
    train_split, test_split = generate_dataset(config.dataset, config.generator_seed)
    write_dataset(train_split, config.output_dir / TRAIN_FILE)
    write_dataset(test_split, config.output_dir / TEST_FILE)
    click.echo(
        f"Wrote {len(train_split)} train and {len(test_split)} test examples "
        f"to {config.output_dir}"
    )


@cli.command("train")
@common_options
@click.option(
    "--data",
    "data_dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help=f"Directory with {TRAIN_FILE} and {TEST_FILE} from gen-data",
)
@handle_errors
def train_cmd(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
) -> None:
    """Train the classifier and write a checkpoint."""
    config = _load(config_path, seed, out_dir, preset)
    session = _session(config, data_dir, None)
    model = session.require_model()
    path = write_checkpoint(model, config.output_dir / MODEL_FILE)
    click.echo(f"Test accuracy {100.0 * accuracy(model, session.test_split):.2f}%")
    click.echo(f"Wrote {path}")


@cli.command("attack-table")
@common_options
@session_options
@handle_errors
def attack_table(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
) -> None:
    """Accuracy and PSNR of every configured attack pipeline."""
    config = _load(config_path, seed, out_dir, preset)
    rows = run_attack_table(_session(config, data_dir, model_path))
    click.echo(f"Wrote {emit_csv(rows, config.output_dir / 'attack_table.csv')}")


@cli.command("dsr-sweep")
@common_options
@session_options
@handle_errors
def dsr_sweep(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
) -> None:
    """Decision-space metrics as a function of JPEG quality."""
    config = _load(config_path, seed, out_dir, preset)
    result = run_quality_sweep(_session(config, data_dir, model_path))
    click.echo(f"Wrote {emit_csv(result, config.output_dir / 'dsr_sweep.csv')}")


@cli.command("order-exp")
@common_options
@session_options
@handle_errors
def order_exp(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
) -> None:
    """Compare compressing before and after the attack."""
    config = _load(config_path, seed, out_dir, preset)
    rows = run_order_experiment(_session(config, data_dir, model_path))
    click.echo(f"Wrote {emit_csv(rows, config.output_dir / 'order_experiment.csv')}")


@cli.command("eps-ablation")
@common_options
@session_options
@click.option(
    "--eps",
    "epsilons",
    type=click.FloatRange(min=0.0),
    multiple=True,
    help="Budget to evaluate (repeatable; defaults to ablation.epsilons)",
)
@handle_errors
def eps_ablation(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
    epsilons: tuple[float, ...],
) -> None:
    """Accuracy of each attack row across perturbation budgets."""
    config = _load(config_path, seed, out_dir, preset)
    session = _session(config, data_dir, model_path)
    rows = run_epsilon_ablation(session, list(epsilons) or None)
    click.echo(f"Wrote {emit_csv(rows, config.output_dir / 'eps_ablation.csv')}")


@cli.command("plane")
@common_options
@session_options
@click.option("--index", type=click.IntRange(min=0), default=0, show_default=True,
              help="Test example at the centre of the plane")
@click.option("--quality", default=None,
              help="JPEG quality (or 'identity') in the loop; omit for the bare classifier")
@handle_errors
def plane(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
    index: int,
    quality: str | None,
) -> None:
    """Write the label and margin heatmaps of one probing plane."""
    config = _load(config_path, seed, out_dir, preset)
    token = _parse_quality(quality)
    grid = plane_grid(_session(config, data_dir, model_path), index, token)
    stem = "plane" if token is None else f"plane_q{token}"
    for path in emit_heatmap(grid, config.output_dir / stem):
        click.echo(f"Wrote {path}")


@cli.command("radius-study")
@common_options
@session_options
@handle_errors
def radius_study(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
) -> None:
    """Robust-radius proxy before and after compression."""
    config = _load(config_path, seed, out_dir, preset)
    rows = run_radius_study(_session(config, data_dir, model_path))
    click.echo(f"Wrote {emit_csv(rows, config.output_dir / 'radius_study.csv')}")


@cli.command("suite")
@common_options
@session_options
@handle_errors
def suite(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
) -> None:
    """Run every experiment and write the CSVs, heatmaps and report.md."""
    config = _load(config_path, seed, out_dir, preset)
    files = run_suite(_session(config, data_dir, model_path))
    for name, path in sorted(files.items()):
        click.echo(f"{name}: {path}")


@cli.command("bound-check")
@common_options
@session_options
@click.option("--index", type=click.IntRange(min=0), default=0, show_default=True,
              help="Test example to check")
@click.option("--operator", "operator_kind", type=click.Choice(OPERATOR_KINDS),
              default="pca", show_default=True, help="Compression operator")
@click.option("--quality", type=click.IntRange(1, 100), default=None,
              help="JPEG quality (defaults to compression.jpeg.composed_quality)")
@click.option("--components", type=click.IntRange(min=1), default=None,
              help="PCA components (defaults to compression.pca.composed_components)")
@click.option("--linear", is_flag=True,
              help="Train a linear classifier so the bound can be certified")
@click.option("--probes", type=click.IntRange(min=1), default=32, show_default=True,
              help="Random probes for Lipschitz estimates and line search")
@handle_errors
def bound_check(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    preset: str,
    data_dir: Path | None,
    model_path: Path | None,
    index: int,
    operator_kind: str,
    quality: int | None,
    components: int | None,
    linear: bool,
    probes: int,
) -> None:
    """Check the compressed-model robust-radius bound at one test example."""
    extra: dict[str, Any] = {"model.hidden": []} if linear else {}
    config = _load(config_path, seed, out_dir, preset, extra)
    session = _session(config, data_dir, model_path)
    comp = config.compression
    operator = session.factory.build(
        operator_kind,
        quality=quality if quality is not None else comp.jpeg_composed_quality,
        components=components if components is not None else comp.pca_composed_components,
        patch=comp.patch,
        rank=comp.rank,
    )
    report = radius_bound_check(session, index, operator, probes=probes)
    click.echo(f"operator:          {operator.name}")
    click.echo(f"m(C(x)):           {report.compressed_margin:.6g}")
    click.echo(f"L_f, L_C:          {report.lipschitz_f:.6g}, {report.lipschitz_c:.6g}")
    click.echo(f"bound:             {report.bound:.6g}")
    click.echo(f"empirical radius:  {report.empirical_radius:.6g}")
    click.echo(f"certified:         {'yes' if report.certified else 'no (advisory)'}")
    click.echo(f"holds:             {'yes' if report.holds else 'no'}")


def main() -> int:
    """Main entry point for the CLI application.

    Returns:
        Exit code (0 for success, 1 for an unexpected error)
    """
    try:
        cli(obj={})
        return 0
    except Exception as e:
        click.echo(f"Error: {e}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
