"""Small differentiable image classifier.

Forward and reverse passes, margins, SGD training and checkpoint IO.
"""

from dsrkit.classifier.checkpoint import (
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
    write_checkpoint,
)
from dsrkit.classifier.network import (
    cross_entropy,
    forward,
    forward_batch,
    input_gradient,
    input_gradients,
    loss_batch,
    margin,
    margin_gradient,
    margin_gradients,
    margins,
    predict,
    predict_batch,
)
from dsrkit.classifier.trainer import (
    TrainingConfig,
    accuracy,
    init_classifier,
    train,
    train_with_history,
)

__all__ = [
    "TrainingConfig",
    "accuracy",
    "cross_entropy",
    "forward",
    "forward_batch",
    "init_classifier",
    "input_gradient",
    "input_gradients",
    "load_checkpoint",
    "loss_batch",
    "margin",
    "margin_gradient",
    "margin_gradients",
    "margins",
    "predict",
    "predict_batch",
    "read_checkpoint",
    "save_checkpoint",
    "train",
    "train_with_history",
    "write_checkpoint",
]
