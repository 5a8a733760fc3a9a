"""Composition of compression and attacks.

compress_then_attack perturbs the compressed image z = C(x) inside an epsilon
ball centred at z; the gradient is taken at the compressed image and never
flows through C. attack_then_compress compresses an already perturbed image.
"""

import numpy as np
from numpy.typing import NDArray

from dsrkit.attacks.gradient import attack_batch
from dsrkit.errors import ConfigError
from dsrkit.models import Classifier, Image, PipelineOrder, PipelineSpec


def _check(spec: PipelineSpec) -> None:
    """Raise ValueError if the pipeline spec is invalid."""
    problems = spec.validate()
    if problems:
        raise ConfigError("; ".join(problems))


def run_pipeline_batch(
    spec: PipelineSpec,
    model: Classifier,
    xs: NDArray[np.float64],
    labels: NDArray[np.int64],
    offset: int = 0,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Apply a pipeline to a batch.

    Args:
        spec: Order, operator and attack
        model: Classifier under attack
        xs: Clean images
        labels: True labels
        offset: Dataset index of ``xs[0]`` (keeps PGD random starts batch-independent)

    Returns:
        ``(adversarial, reference)`` where the reference for PSNR is always the
        clean input

    Raises:
        ConfigError: If the operator or attack required by the order is missing
    """
    _check(spec)
    xs = np.asarray(xs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    order = spec.order

    if order == PipelineOrder.ATTACK_ONLY:
        assert spec.attack is not None
        out = attack_batch(model, xs, labels, spec.attack, offset=offset)
    elif order == PipelineOrder.COMPRESS_ONLY:
        assert spec.operator is not None
        out = spec.operator.compress_batch(xs)
    elif order == PipelineOrder.COMPRESS_THEN_ATTACK:
        assert spec.operator is not None and spec.attack is not None
        compressed = spec.operator.compress_batch(xs)
        out = attack_batch(model, compressed, labels, spec.attack, offset=offset)
    else:
        assert spec.operator is not None and spec.attack is not None
        perturbed = attack_batch(model, xs, labels, spec.attack, offset=offset)
        out = spec.operator.compress_batch(perturbed)
    return out, xs


def run_pipeline(
    spec: PipelineSpec, model: Classifier, x: Image, y: int
) -> tuple[Image, Image]:
    """Apply a pipeline to one image; see :func:`run_pipeline_batch`."""
    x = np.asarray(x, dtype=np.float64)
    adv, ref = run_pipeline_batch(spec, model, x[None, ...], np.array([y]))
    return adv[0], ref[0]


def attack_center(
    spec: PipelineSpec, xs: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Center of the epsilon ball the attack of ``spec`` is confined to."""
    _check(spec)
    if spec.order == PipelineOrder.COMPRESS_THEN_ATTACK:
        assert spec.operator is not None
        return spec.operator.compress_batch(xs)
    return np.asarray(xs, dtype=np.float64)
