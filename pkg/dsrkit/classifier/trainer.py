"""Mini-batch SGD training of the ReLU classifier."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from dsrkit.classifier.network import parameter_gradients, predict_batch
from dsrkit.models import Classifier, LabeledDataset
from dsrkit.numerics.random import RandomSource

logger = logging.getLogger(__name__)


@dataclass
class TrainingConfig:
    """Optimizer and architecture settings.

    Attributes:
        epochs: Passes over the training set (0 returns the initial model)
        batch_size: Examples per SGD step
        learning_rate: SGD step size
        seed: Seed for initialization and shuffling
        hidden: Hidden layer widths; empty gives a linear softmax model
    """

    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.02
    seed: int = 0
    hidden: tuple[int, ...] = (64, 64)

    def validate(self) -> list[str]:
        """Validate the optimizer settings.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []
        if self.epochs < 0:
            errors.append(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            errors.append(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0.0:
            errors.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if any(width < 1 for width in self.hidden):
            errors.append("hidden widths must be positive")
        return errors

    def is_valid(self) -> bool:
        """Check if the configuration is valid."""
        return len(self.validate()) == 0


def init_classifier(
    input_shape: tuple[int, ...],
    num_classes: int,
    hidden: tuple[int, ...],
    rng: RandomSource,
) -> Classifier:
    """Glorot-uniform weights and zero biases.

    Args:
        input_shape: Image shape
        num_classes: Output count K
        hidden: Hidden layer widths
        rng: Source for the weight draws

    Returns:
        Freshly initialized classifier
    """
    d = int(np.prod(input_shape, dtype=np.int64))
    sizes = [d, *hidden, num_classes]
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform_range(-limit, limit, (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Classifier(weights=weights, biases=biases, input_shape=tuple(input_shape))


def train_with_history(
    dataset: LabeledDataset, config: TrainingConfig
) -> tuple[Classifier, list[float]]:
    """Train a classifier and return it with the mean loss of every epoch.

    Raises:
        ValueError: If the dataset is empty or invalid, or the config is invalid
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    problems = dataset.validate() + config.validate()
    if problems:
        raise ValueError("invalid training input: " + "; ".join(problems))

    rng = RandomSource(config.seed)
    model = init_classifier(dataset.image_shape, dataset.num_classes, config.hidden, rng)
    images = dataset.images
    labels = dataset.labels
    history: list[float] = []

    for epoch in range(config.epochs):
        order = rng.child(epoch).permutation(len(dataset))
        batch_losses = []
        for start in range(0, len(dataset), config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, weight_grads, bias_grads = parameter_gradients(model, images[idx], labels[idx])
            for i in range(len(model.weights)):
                model.weights[i] -= config.learning_rate * weight_grads[i]
                model.biases[i] -= config.learning_rate * bias_grads[i]
            batch_losses.append(loss * len(idx))
        epoch_loss = math.fsum(batch_losses) / len(dataset)
        history.append(epoch_loss)
        logger.info("epoch %d/%d loss %.6f", epoch + 1, config.epochs, epoch_loss)

    return model, history


def train(dataset: LabeledDataset, config: TrainingConfig) -> Classifier:
    """Train a classifier with seed-deterministic mini-batch SGD.

    Args:
        dataset: Training split
        config: Optimizer and architecture settings

    Returns:
        Trained classifier

    Raises:
        ValueError: If the dataset is empty

    Example:
        >>> model = train(dataset, TrainingConfig(epochs=0, seed=3))
        >>> model.layer_sizes[-1] == dataset.num_classes
        True
    """
    model, _ = train_with_history(dataset, config)
    return model


def accuracy(model: Classifier, dataset: LabeledDataset) -> float:
    """Fraction of correctly classified examples in [0, 1]."""
    if len(dataset) == 0:
        return 0.0
    return float(np.mean(predict_batch(model, dataset.images) == dataset.labels))
