"""Forward and reverse passes of the ReLU classifier.

Single-image functions are thin wrappers around the batched ones so that a
lone image and the same image inside a batch take the same arithmetic path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from dsrkit.errors import DimensionError
from dsrkit.models import Classifier, Image


@dataclass
class ForwardCache:
    """Activations kept for the reverse pass."""

    inputs: list[NDArray[np.float64]]
    pre_activations: list[NDArray[np.float64]]
    logits: NDArray[np.float64]


def _flatten_batch(model: Classifier, xs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Check the image shape and flatten a batch to (N, d)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.shape[1:] != tuple(model.input_shape):
        raise DimensionError(
            f"model expects images of shape {tuple(model.input_shape)}, got {xs.shape[1:]}"
        )
    return xs.reshape(xs.shape[0], -1)


def _forward_cached(model: Classifier, flat: NDArray[np.float64]) -> ForwardCache:
    """Forward pass that keeps each layer input and pre-activation."""
    inputs = []
    pre = []
    h = flat
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases, strict=True)):
        inputs.append(h)
        z = h @ w.T + b
        pre.append(z)
        h = z if i == last else np.maximum(z, 0.0)
    return ForwardCache(inputs=inputs, pre_activations=pre, logits=h)


def _backward(
    model: Classifier, cache: ForwardCache, grad_logits: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Propagate d(objective)/d(logits) back to the flattened inputs."""
    grad = grad_logits
    for i in range(len(model.weights) - 1, -1, -1):
        if i < len(model.weights) - 1:
            grad = grad * (cache.pre_activations[i] > 0.0)
        grad = grad @ model.weights[i]
    return grad


def forward_batch(model: Classifier, xs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Logits for a batch of images, shape (N, K).

    Raises:
        DimensionError: If the images do not match the model input shape
    """
    return _forward_cached(model, _flatten_batch(model, xs)).logits


def forward(model: Classifier, x: Image) -> NDArray[np.float64]:
    """Logits of one image, shape (K,).

    Raises:
        DimensionError: If ``x`` does not match the model input shape

    Example:
        >>> m = Classifier([np.eye(2)], [np.zeros(2)], (2,))
        >>> forward(m, np.array([0.3, 0.7])).tolist()
        [0.3, 0.7]
    """
    x = np.asarray(x, dtype=np.float64)
    return forward_batch(model, x[None, ...])[0]


def predict_batch(model: Classifier, xs: NDArray[np.float64]) -> NDArray[np.int64]:
    """Predicted labels, ties broken toward the lowest class index."""
    return np.argmax(forward_batch(model, xs), axis=1).astype(np.int64)


def predict(logits: NDArray[np.float64]) -> int:
    """Argmax of one logit vector with lowest-index tie-break."""
    return int(np.argmax(logits))


def margins(logits: NDArray[np.float64], labels: NDArray[np.int64]) -> NDArray[np.float64]:
    """Row-wise ``f_y - max_{k != y} f_k`` for logits of shape (N, K).

    Raises:
        ValueError: If K < 2 or a label is out of range
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise ValueError(f"margin needs at least 2 classes, got logits of shape {logits.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise ValueError("label out of range for the logits")
    rows = np.arange(logits.shape[0])
    true = logits[rows, labels]
    others = logits.copy()
    others[rows, labels] = -np.inf
    return true - others.max(axis=1)


def margin(logits: NDArray[np.float64], y: int) -> float:
    """Classification margin ``f_y - max_{k != y} f_k``.

    Positive iff y is the unique top-1 class.

    Example:
        >>> margin(np.array([2.0, 1.0, 0.0]), 0)
        1.0
    """
    logits = np.asarray(logits, dtype=np.float64)
    return float(margins(logits[None, :], np.array([y]))[0])


def softmax(logits: NDArray[np.float64]) -> NDArray[np.float64]:
    """Row-wise numerically stable softmax."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def cross_entropy(logits: NDArray[np.float64], labels: NDArray[np.int64]) -> NDArray[np.float64]:
    """Per-row cross-entropy of softmax(logits) against integer labels."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return log_norm - shifted[np.arange(logits.shape[0]), labels]


def loss_batch(
    model: Classifier, xs: NDArray[np.float64], labels: NDArray[np.int64]
) -> NDArray[np.float64]:
    """Cross-entropy loss of each image."""
    return cross_entropy(forward_batch(model, xs), np.asarray(labels, dtype=np.int64))


def input_gradients(
    model: Classifier, xs: NDArray[np.float64], labels: NDArray[np.int64]
) -> NDArray[np.float64]:
    """Gradient of the cross-entropy loss with respect to each input pixel.

    Args:
        model: Classifier
        xs: Batch of images (N, ...)
        labels: True labels (N,)

    Returns:
        Array with the shape of ``xs``
    """
    labels = np.asarray(labels, dtype=np.int64)
    cache = _forward_cached(model, _flatten_batch(model, xs))
    if labels.size and (labels.min() < 0 or labels.max() >= model.num_classes):
        raise ValueError("label out of range for the model")
    grad_logits = softmax(cache.logits)
    grad_logits[np.arange(labels.shape[0]), labels] -= 1.0
    return _backward(model, cache, grad_logits).reshape(np.shape(xs))


def input_gradient(model: Classifier, x: Image, y: int) -> Image:
    """Cross-entropy input gradient of one image (same shape as ``x``)."""
    x = np.asarray(x, dtype=np.float64)
    return input_gradients(model, x[None, ...], np.array([y]))[0]


def margin_gradients(
    model: Classifier, xs: NDArray[np.float64], labels: NDArray[np.int64]
) -> NDArray[np.float64]:
    """Gradient of the margin ``f_y - f_k*`` where k* is the strongest rival."""
    labels = np.asarray(labels, dtype=np.int64)
    cache = _forward_cached(model, _flatten_batch(model, xs))
    rows = np.arange(labels.shape[0])
    others = cache.logits.copy()
    others[rows, labels] = -np.inf
    rivals = np.argmax(others, axis=1)
    grad_logits = np.zeros_like(cache.logits)
    grad_logits[rows, labels] = 1.0
    grad_logits[rows, rivals] -= 1.0
    return _backward(model, cache, grad_logits).reshape(np.shape(xs))


def margin_gradient(model: Classifier, x: Image, y: int) -> Image:
    """Margin gradient of one image."""
    x = np.asarray(x, dtype=np.float64)
    return margin_gradients(model, x[None, ...], np.array([y]))[0]


def parameter_gradients(
    model: Classifier, xs: NDArray[np.float64], labels: NDArray[np.int64]
) -> tuple[float, list[NDArray[np.float64]], list[NDArray[np.float64]]]:
    """Mean cross-entropy and its gradients with respect to every parameter.

    Returns:
        Tuple ``(loss, weight_grads, bias_grads)``
    """
    labels = np.asarray(labels, dtype=np.int64)
    cache = _forward_cached(model, _flatten_batch(model, xs))
    count = labels.shape[0]
    loss = float(cross_entropy(cache.logits, labels).mean())

    grad = softmax(cache.logits)
    grad[np.arange(count), labels] -= 1.0
    grad /= count

    weight_grads: list[NDArray[np.float64]] = [np.empty(0)] * len(model.weights)
    bias_grads: list[NDArray[np.float64]] = [np.empty(0)] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        if i < len(model.weights) - 1:
            grad = grad * (cache.pre_activations[i] > 0.0)
        weight_grads[i] = grad.T @ cache.inputs[i]
        bias_grads[i] = grad.sum(axis=0)
        grad = grad @ model.weights[i]
    return loss, weight_grads, bias_grads
