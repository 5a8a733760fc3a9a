"""Sign-gradient attacks under an L-infinity budget.

PGD steps in the order: ascent step, projection onto the epsilon ball around
the center, clip to [0, 1]. ``sign(0) = 0``, so a dead gradient leaves the
input untouched.
"""

import numpy as np
from numpy.typing import NDArray

from dsrkit.classifier.network import input_gradients
from dsrkit.models import AttackConfig, AttackKind, Classifier, Image
from dsrkit.numerics.random import RandomSource


def _check(config: AttackConfig) -> None:
    """Raise ValueError if the attack settings are invalid."""
    problems = config.validate()
    if problems:
        raise ValueError("invalid attack config: " + "; ".join(problems))


def fgsm_batch(
    model: Classifier,
    xs: NDArray[np.float64],
    labels: NDArray[np.int64],
    epsilon: float,
) -> NDArray[np.float64]:
    """FGSM on every image of a batch: ``clip(x + eps * sign(grad), 0, 1)``.

    Raises:
        ValueError: If epsilon is negative
        DimensionError: If the images do not fit the model
    """
    if not epsilon >= 0.0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    xs = np.asarray(xs, dtype=np.float64)
    if epsilon == 0.0:
        return xs.copy()
    step = epsilon * np.sign(input_gradients(model, xs, labels))
    return np.clip(xs + step, 0.0, 1.0)


def fgsm(model: Classifier, x: Image, y: int, epsilon: float) -> Image:
    """Fast gradient sign attack on one image."""
    x = np.asarray(x, dtype=np.float64)
    return fgsm_batch(model, x[None, ...], np.array([y]), epsilon)[0]


def pgd_batch(
    model: Classifier,
    xs: NDArray[np.float64],
    labels: NDArray[np.int64],
    config: AttackConfig,
    offset: int = 0,
) -> NDArray[np.float64]:
    """Projected gradient ascent on every image of a batch.

    The random start of example ``i`` is drawn from
    ``RandomSource(config.seed).child(offset + i)``, so results do not depend
    on how a dataset is split into batches.

    Args:
        model: Classifier to attack
        xs: Clean images (N, ...), also the centers of the epsilon balls
        labels: True labels
        config: Budget, step size, iteration count and random start
        offset: Dataset index of ``xs[0]``

    Raises:
        ValueError: If the config is invalid
    """
    _check(config)
    xs = np.asarray(xs, dtype=np.float64)
    eps = config.epsilon
    if eps == 0.0:
        return xs.copy()
    lower = xs - eps
    upper = xs + eps

    adv = xs.copy()
    if config.random_start:
        root = RandomSource(config.seed)
        noise = np.stack(
            [
                root.child(offset + i).uniform_range(-eps, eps, xs.shape[1:])
                for i in range(xs.shape[0])
            ]
        )
        adv = np.clip(xs + noise, 0.0, 1.0)

    for _ in range(config.iterations):
        step = config.alpha * np.sign(input_gradients(model, adv, labels))
        adv = np.clip(np.clip(adv + step, lower, upper), 0.0, 1.0)
    return adv


def pgd(model: Classifier, x: Image, y: int, config: AttackConfig) -> Image:
    """Projected gradient descent attack on one image (dataset index 0)."""
    x = np.asarray(x, dtype=np.float64)
    return pgd_batch(model, x[None, ...], np.array([y]), config)[0]


def attack_batch(
    model: Classifier,
    xs: NDArray[np.float64],
    labels: NDArray[np.int64],
    config: AttackConfig,
    offset: int = 0,
) -> NDArray[np.float64]:
    """Dispatch to FGSM or PGD according to ``config.kind``."""
    _check(config)
    if config.kind == AttackKind.FGSM:
        return fgsm_batch(model, xs, labels, config.epsilon)
    return pgd_batch(model, xs, labels, config, offset=offset)
