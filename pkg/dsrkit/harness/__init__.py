"""Experiment orchestration: synthetic data, configuration, runners and output files."""

from dsrkit.harness.config import ExperimentConfig, load_config, parse_config_text
from dsrkit.harness.dataset import (
    DatasetSpec,
    generate_dataset,
    load_dataset,
    read_dataset,
    save_dataset,
    write_dataset,
)
from dsrkit.harness.emit import emit_csv, emit_heatmap
from dsrkit.harness.experiments import (
    ExperimentSession,
    prepare_session,
    run_attack_table,
    run_epsilon_ablation,
    run_order_experiment,
    run_quality_sweep,
    run_radius_study,
    run_suite,
)
from dsrkit.harness.report import render_report

__all__ = [
    "DatasetSpec",
    "ExperimentConfig",
    "ExperimentSession",
    "emit_csv",
    "emit_heatmap",
    "generate_dataset",
    "load_config",
    "load_dataset",
    "parse_config_text",
    "prepare_session",
    "read_dataset",
    "render_report",
    "run_attack_table",
    "run_epsilon_ablation",
    "run_order_experiment",
    "run_quality_sweep",
    "run_radius_study",
    "run_suite",
    "save_dataset",
    "write_dataset",
]
