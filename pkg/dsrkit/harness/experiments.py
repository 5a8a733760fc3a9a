"""Experiment runners: attack table, quality sweep, order experiment,
epsilon ablation, robust-radius study and the full suite.

Every runner takes an :class:`ExperimentSession` holding the configuration,
both dataset splits and the trained classifier. Runs are deterministic for a
given master seed; all means use exactly rounded sums.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from dsrkit.attacks.pipeline import run_pipeline_batch
from dsrkit.classifier.network import forward, margin, predict_batch
from dsrkit.classifier.trainer import accuracy, train
from dsrkit.compression.base import CompressionOperator, IdentityOperator
from dsrkit.compression.jpeg import JpegOperator
from dsrkit.compression.operators import OperatorFactory
from dsrkit.errors import DegeneratePlaneError, StateError
from dsrkit.geometry.metrics import dsr_metrics
from dsrkit.geometry.plane import build_plane, evaluate_grid
from dsrkit.geometry.radius import UNBOUNDED, check_radius_bound, robust_radius_proxy
from dsrkit.harness.config import (
    IDENTITY_QUALITY,
    ExperimentConfig,
    QualityToken,
    RowPlan,
    quality_label,
)
from dsrkit.harness.dataset import generate_dataset
from dsrkit.harness.emit import emit_csv, emit_heatmap
from dsrkit.harness.report import render_report
from dsrkit.models import (
    AttackConfig,
    AttackKind,
    Classifier,
    DsrMetrics,
    EpsilonRow,
    LabeledDataset,
    PipelineOrder,
    PipelineSpec,
    PlaneGrid,
    PlaneSpec,
    RadiusBoundReport,
    RadiusRow,
    ResultRow,
    SweepResult,
    SweepRow,
)
from dsrkit.numerics.linalg import PSNR_CAP, psnr
from dsrkit.numerics.random import RandomSource, mix_seed

logger = logging.getLogger(__name__)

EVAL_BATCH = 256
CLEAN_LABEL = "clean"


@dataclass
class ExperimentSession:
    """Configuration, data and model shared by the experiment runners.

    Attributes:
        config: Validated experiment configuration
        train_split: Training data (also used to fit PCA bases)
        test_split: Evaluation data
        model: Trained classifier, or None before training
    """

    config: ExperimentConfig
    train_split: LabeledDataset
    test_split: LabeledDataset
    model: Classifier | None = None
    factory: OperatorFactory = field(init=False)

    def __post_init__(self) -> None:
        self.factory = OperatorFactory(self.train_split)

    def require_model(self) -> Classifier:
        """Return the model.

        Raises:
            StateError: If no model has been trained or loaded
        """
        if self.model is None:
            raise StateError("no trained model available; train or load one first")
        return self.model


def prepare_session(
    config: ExperimentConfig,
    data: tuple[LabeledDataset, LabeledDataset] | None = None,
    model: Classifier | None = None,
    train_model: bool = True,
) -> ExperimentSession:
    """Generate (or take) the data and train (or take) the model.

    Args:
        config: Experiment configuration
        data: Existing ``(train, test)`` splits; generated from the config when None
        model: Existing classifier; trained when None and ``train_model`` is set
        train_model: Whether to train a missing model

    Returns:
        Session ready for the runners
    """
    if data is None:
        data = generate_dataset(config.dataset, config.generator_seed)
    train_split, test_split = data
    session = ExperimentSession(config, train_split, test_split, model)
    if session.model is None and train_model:
        logger.info("Training classifier %s", [train_split.dimension, *config.hidden])
        session.model = train(train_split, config.training_config())
    if session.model is not None:
        logger.info("Clean test accuracy %.2f%%", 100.0 * accuracy(session.model, test_split))
    return session


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation with exactly rounded sums.

    Example:
        >>> mean_std([1.0, 3.0])
        (2.0, 1.0)
    """
    if not values:
        raise ValueError("cannot aggregate an empty sequence")
    mean = math.fsum(values) / len(values)
    variance = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(variance)


def fgsm_attack(config: ExperimentConfig, epsilon: float) -> AttackConfig:
    """FGSM settings seeded from the run."""
    return AttackConfig(kind=AttackKind.FGSM, epsilon=epsilon, seed=config.attack_seed)


def pgd_attack(
    config: ExperimentConfig, epsilon: float, alpha: float, iterations: int
) -> AttackConfig:
    """PGD settings seeded from the run, with the configured random start."""
    return AttackConfig(
        kind=AttackKind.PGD,
        epsilon=epsilon,
        alpha=alpha,
        iterations=iterations,
        random_start=config.attack.pgd_random_start,
        seed=config.attack_seed,
    )


def composed_alpha(config: ExperimentConfig, epsilon: float) -> float:
    """PGD step for compression-aware rows: a quarter of the budget."""
    return epsilon / 4.0 if epsilon > 0.0 else config.attack.pgd_alpha


def _row_operator(session: ExperimentSession, kind: str, composed: bool) -> CompressionOperator:
    """Operator for a table row; composed rows use the milder settings."""
    comp = session.config.compression
    return session.factory.build(
        kind,
        quality=comp.jpeg_composed_quality if composed else comp.jpeg_quality,
        components=comp.pca_composed_components if composed else comp.pca_components,
        patch=comp.patch,
        rank=comp.rank,
    )


def _row_attack(session: ExperimentSession, plan: RowPlan) -> AttackConfig | None:
    """Attack for a table row, or None for compression-only rows."""
    config = session.config
    settings = config.attack
    if plan.attack is None:
        return None
    if plan.attack == AttackKind.FGSM:
        return fgsm_attack(config, settings.fgsm_epsilon)
    if plan.order != PipelineOrder.COMPRESS_THEN_ATTACK:
        return pgd_attack(config, settings.pgd_epsilon, settings.pgd_alpha, settings.pgd_iters)
    return pgd_attack(
        config,
        settings.pgd_epsilon,
        composed_alpha(config, settings.pgd_epsilon),
        settings.composed_pgd_iters,
    )


def build_pipelines(session: ExperimentSession) -> list[PipelineSpec]:
    """Pipeline specs for the configured attack-table rows."""
    specs = []
    for plan in session.config.row_plans():
        operator = None
        if plan.operator is not None:
            operator = _row_operator(session, plan.operator, composed=plan.attack is not None)
        specs.append(PipelineSpec(plan.label, plan.order, operator, _row_attack(session, plan)))
    return specs


def pipeline_outputs(
    session: ExperimentSession, spec: PipelineSpec
) -> tuple[NDArray[np.int64], list[float]]:
    """Predictions on a pipeline's outputs and per-example PSNR against the clean images."""
    model = session.require_model()
    xs = session.test_split.images
    labels = session.test_split.labels
    if len(labels) == 0:
        raise StateError("test split is empty")

    predictions = []
    scores: list[float] = []
    for start in range(0, len(labels), EVAL_BATCH):
        stop = start + EVAL_BATCH
        batch, batch_labels = xs[start:stop], labels[start:stop]
        adv, reference = run_pipeline_batch(spec, model, batch, batch_labels, offset=start)
        predictions.append(predict_batch(model, adv))
        scores.extend(psnr(r, a) for r, a in zip(reference, adv, strict=True))
    return np.concatenate(predictions), scores


def _result_row(
    label: str, labels: NDArray[np.int64], predictions: NDArray[np.int64], scores: list[float]
) -> ResultRow:
    """Accuracy in percent and mean PSNR of one pipeline, logged as it is built."""
    correct = int(np.count_nonzero(predictions == labels))
    row = ResultRow(
        label=label,
        accuracy=100.0 * correct / len(labels),
        psnr=math.fsum(scores) / len(scores),
        count=len(labels),
    )
    logger.info("%-20s accuracy %6.2f%%  PSNR %6.2f dB", row.label, row.accuracy, row.psnr)
    return row


def evaluate_pipeline(session: ExperimentSession, spec: PipelineSpec) -> ResultRow:
    """Accuracy and mean PSNR of one pipeline over the test split."""
    predictions, scores = pipeline_outputs(session, spec)
    return _result_row(spec.label, session.test_split.labels, predictions, scores)


def clean_row(session: ExperimentSession) -> ResultRow:
    """Accuracy on the unmodified test split; PSNR is the cap by convention."""
    model = session.require_model()
    test = session.test_split
    return ResultRow(
        label=CLEAN_LABEL,
        accuracy=100.0 * accuracy(model, test),
        psnr=PSNR_CAP,
        count=len(test),
    )


def run_attack_table(session: ExperimentSession) -> list[ResultRow]:
    """Clean row followed by one row per configured pipeline.

    Raises:
        StateError: If the session has no model
    """
    rows = [clean_row(session)]
    logger.info("Attack table: %d pipelines", len(session.config.table_rows))
    rows.extend(evaluate_pipeline(session, spec) for spec in build_pipelines(session))
    return rows


def correct_seeds(session: ExperimentSession, count: int, purpose: str) -> NDArray[np.intp]:
    """Indices of the first ``count`` correctly classified test examples.

    Fewer are returned, with a warning, when the test split has fewer.

    Raises:
        StateError: If no test example is classified correctly
    """
    model = session.require_model()
    test = session.test_split
    correct = np.flatnonzero(predict_batch(model, test.images) == test.labels)
    if correct.size == 0:
        raise StateError(f"no correctly classified test examples for the {purpose}")
    if correct.size < count:
        logger.warning(
            "%s: only %d correctly classified examples, reducing seeds from %d",
            purpose,
            correct.size,
            count,
        )
    return correct[:count]


def quality_operator(token: QualityToken) -> CompressionOperator:
    """Identity for the ``identity`` token, the JPEG-like codec otherwise."""
    if token == IDENTITY_QUALITY:
        return IdentityOperator()
    return JpegOperator(int(token))


def seed_planes(session: ExperimentSession, count: int) -> list[PlaneSpec]:
    """Probing planes around the sweep seeds; seeds with a degenerate plane are skipped.

    The random direction of each plane depends only on the master seed and the
    example's index in the test split.
    """
    model = session.require_model()
    config = session.config
    rng = RandomSource(config.plane_seed)
    test = session.test_split
    planes = []
    for index in correct_seeds(session, count, "quality sweep"):
        try:
            planes.append(
                build_plane(
                    model,
                    test.images[index],
                    int(test.labels[index]),
                    rng.child(int(index)),
                    radius=config.sweep.radius,
                    resolution=config.sweep.resolution,
                )
            )
        except DegeneratePlaneError as e:
            logger.warning("skipping seed %d: %s", index, e)
    if not planes:
        raise StateError("no usable probing plane around any seed")
    return planes


def run_quality_sweep(session: ExperimentSession) -> SweepResult:
    """Decision-space metrics per JPEG quality, averaged over per-seed planes.

    Each seed keeps the same plane across qualities. Standard deviations are
    taken across seeds.
    """
    model = session.require_model()
    sweep = session.config.sweep
    planes = seed_planes(session, sweep.seeds)
    logger.info("Quality sweep over %s with %d seeds", sweep.qualities, len(planes))

    result = SweepResult(seed_count=len(planes))
    for token in sweep.qualities:
        operator = quality_operator(token)
        per_seed = [dsr_metrics(evaluate_grid(model, operator, plane)) for plane in planes]
        label = quality_label(token)
        for name in DsrMetrics.METRIC_NAMES:
            mean, std = mean_std([getattr(m, name) for m in per_seed])
            result.rows.append(SweepRow(quality=label, metric=name, mean=mean, std=std))
        logger.info("quality %s: area %.4f", label, result.value(label, "area")[0])
    return result


def restoration_fraction(
    labels: NDArray[np.int64],
    attacked: NDArray[np.int64],
    purified: NDArray[np.int64],
) -> float:
    """Share of attack-only failures that compressing the attacked image repairs.

    Returns 0.0 when the attack caused no failures.
    """
    failures = attacked != labels
    if not failures.any():
        return 0.0
    return int(np.count_nonzero(purified[failures] == labels[failures])) / int(failures.sum())


def run_order_experiment(session: ExperimentSession) -> list[ResultRow]:
    """Clean, compress-only, compress-then-attack and attack-then-compress rows.

    All rows share one operator and one FGSM budget.
    """
    config = session.config
    order = config.order
    operator = session.factory.build(
        order.operator,
        quality=order.quality,
        components=config.compression.pca_composed_components,
        patch=config.compression.patch,
        rank=config.compression.rank,
    )
    attack = fgsm_attack(config, order.epsilon)
    logger.info("Order experiment with %s at eps=%g", operator.name, order.epsilon)

    labels = session.test_split.labels
    rows = [clean_row(session)]
    purified = labels
    for pipeline_order in (
        PipelineOrder.COMPRESS_ONLY,
        PipelineOrder.COMPRESS_THEN_ATTACK,
        PipelineOrder.ATTACK_THEN_COMPRESS,
    ):
        spec = PipelineSpec(
            pipeline_order.value,
            pipeline_order,
            operator,
            None if pipeline_order == PipelineOrder.COMPRESS_ONLY else attack,
        )
        predictions, scores = pipeline_outputs(session, spec)
        rows.append(_result_row(spec.label, labels, predictions, scores))
        if pipeline_order == PipelineOrder.ATTACK_THEN_COMPRESS:
            purified = predictions

    attacked, _ = pipeline_outputs(
        session, PipelineSpec("attack_only", PipelineOrder.ATTACK_ONLY, None, attack)
    )
    restored = restoration_fraction(labels, attacked, purified)
    logger.info("Compression after the attack restores %.2f%% of its failures", 100 * restored)
    return rows


ABLATION_ROWS: tuple[tuple[str, str | None, AttackKind], ...] = (
    ("FGSM", None, AttackKind.FGSM),
    ("JPEG->FGSM", "jpeg", AttackKind.FGSM),
    ("PCA->FGSM", "pca", AttackKind.FGSM),
    ("PatchSVD->FGSM", "patch_svd", AttackKind.FGSM),
    ("PGD", None, AttackKind.PGD),
    ("JPEG->PGD", "jpeg", AttackKind.PGD),
    ("PCA->PGD", "pca", AttackKind.PGD),
    ("PatchSVD->PGD", "patch_svd", AttackKind.PGD),
)


def run_epsilon_ablation(
    session: ExperimentSession, epsilons: Sequence[float] | None = None
) -> list[EpsilonRow]:
    """Accuracy of pixel-space and compression-aware attacks at each budget.

    PGD rows use ``alpha = epsilon / 4`` and the ablation iteration count.
    """
    config = session.config
    chosen = config.ablation.epsilons if epsilons is None else epsilons
    budgets = tuple(float(e) for e in chosen)
    logger.info("Epsilon ablation over %s", budgets)

    rows = []
    for label, kind, attack_kind in ABLATION_ROWS:
        operator = None if kind is None else _row_operator(session, kind, composed=True)
        order = PipelineOrder.COMPRESS_THEN_ATTACK
        if operator is None:
            order = PipelineOrder.ATTACK_ONLY
        accuracies = []
        for eps in budgets:
            if attack_kind == AttackKind.FGSM:
                attack = fgsm_attack(config, eps)
            else:
                alpha = composed_alpha(config, eps)
                attack = pgd_attack(config, eps, alpha, config.ablation.pgd_iters)
            row = evaluate_pipeline(session, PipelineSpec(label, order, operator, attack))
            accuracies.append(row.accuracy)
        rows.append(EpsilonRow(label=label, epsilons=budgets, accuracies=tuple(accuracies)))
    return rows


def _radius_row(
    session: ExperimentSession,
    indices: NDArray[np.intp],
    label: str,
    operator: CompressionOperator | None,
) -> RadiusRow:
    """Radius proxy and margin of f at C(x) (or x) over the seed examples.

    Unbounded radii are left out of the mean and the count.
    """
    model = session.require_model()
    test = session.test_split
    radii = []
    margins = []
    for index in indices:
        x = test.images[index]
        y = int(test.labels[index])
        z = x if operator is None else operator.compress(x)
        radii.append(robust_radius_proxy(model, z, y))
        margins.append(margin(forward(model, z), y))
    finite = [r for r in radii if math.isfinite(r)]
    mean_radius, std_radius = mean_std(finite) if finite else (UNBOUNDED, 0.0)
    mean_margin, _ = mean_std(margins)
    logger.info("radius %s: mean %.4g over %d seeds", label, mean_radius, len(finite))
    return RadiusRow(label, mean_radius, std_radius, mean_margin, len(finite))


def run_radius_study(session: ExperimentSession) -> list[RadiusRow]:
    """Robust-radius proxy on clean inputs and after each JPEG quality.

    The first row (``clean``) uses x itself, the others C(x); the true label
    is kept, so a compressed input that flips class has radius 0.
    """
    study = session.config.radius
    indices = correct_seeds(session, study.seeds, "radius study")
    rows = [_radius_row(session, indices, CLEAN_LABEL, None)]
    for token in study.qualities:
        rows.append(_radius_row(session, indices, quality_label(token), quality_operator(token)))
    return rows


def plane_grid(
    session: ExperimentSession, index: int, quality: QualityToken | None = None
) -> PlaneGrid:
    """Evaluated probing plane around one test example.

    Args:
        session: Session with a model
        index: Index into the test split
        quality: JPEG quality (or ``identity``) in the loop; None evaluates f alone

    Raises:
        IndexError: If the index is outside the test split
        DegeneratePlaneError: If no plane can be built
    """
    model = session.require_model()
    test = session.test_split
    if not 0 <= index < len(test):
        raise IndexError(f"test index {index} outside 0..{len(test) - 1}")
    config = session.config
    spec = build_plane(
        model,
        test.images[index],
        int(test.labels[index]),
        RandomSource(config.plane_seed).child(index),
        radius=config.sweep.radius,
        resolution=config.sweep.resolution,
    )
    operator = None if quality is None else quality_operator(quality)
    return evaluate_grid(model, operator, spec)


def radius_bound_check(
    session: ExperimentSession,
    index: int,
    operator: CompressionOperator,
    probes: int = 32,
) -> RadiusBoundReport:
    """Check the compressed-model radius bound at one test example.

    Raises:
        IndexError: If the index is outside the test split
        PreconditionError: If C(x) is not classified correctly
    """
    model = session.require_model()
    test = session.test_split
    if not 0 <= index < len(test):
        raise IndexError(f"test index {index} outside 0..{len(test) - 1}")
    return check_radius_bound(
        model,
        operator,
        test.images[index],
        int(test.labels[index]),
        probes=probes,
        seed=mix_seed(session.config.probe_seed, index),
    )


def run_suite(session: ExperimentSession, output_dir: Path | None = None) -> dict[str, Path]:
    """Run every experiment and write all CSV files, two heatmaps and ``report.md``.

    Returns:
        Mapping of artifact name to written path
    """
    config = session.config
    out = output_dir if output_dir is not None else config.output_dir
    model = session.require_model()
    files: dict[str, Path] = {}

    table = run_attack_table(session)
    files["attack_table"] = emit_csv(table, out / "attack_table.csv")
    sweep = run_quality_sweep(session)
    files["dsr_sweep"] = emit_csv(sweep, out / "dsr_sweep.csv")
    order_rows = run_order_experiment(session)
    files["order_experiment"] = emit_csv(order_rows, out / "order_experiment.csv")
    ablation = run_epsilon_ablation(session)
    files["eps_ablation"] = emit_csv(ablation, out / "eps_ablation.csv")
    radius_rows = run_radius_study(session)
    files["radius_study"] = emit_csv(radius_rows, out / "radius_study.csv")

    plane = seed_planes(session, 1)[0]
    strongest = config.sweep.qualities[-1]
    for name, operator in (
        ("plane_clean", None),
        (f"plane_q{quality_label(strongest)}", quality_operator(strongest)),
    ):
        ppm, _, _ = emit_heatmap(evaluate_grid(model, operator, plane), out / name)
        files[name] = ppm

    files["report"] = render_report(
        out / "report.md",
        preset=config.preset,
        config=config,
        layer_sizes=model.layer_sizes,
        clean_accuracy=table[0].accuracy,
        attack_table=table,
        sweep=sweep,
        order_rows=order_rows,
        epsilons=[f"{e:g}" for e in ablation[0].epsilons],
        ablation=ablation,
        radius_rows=radius_rows,
        files=dict(files),
    )
    return files
