"""Multinomial logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from modalconv.core import TaskType
from modalconv.classifier.dataset import LabeledDataset
from modalconv.classifier.vectorize import TfidfModel, embed

DEFAULT_LEARNING_RATE = 0.5
DEFAULT_EPOCHS = 300
DEFAULT_L2_PENALTY = 1e-4


class DegenerateLabels(ValueError):
    """Raised when training data carries fewer than two distinct labels."""


class DimensionMismatch(ValueError):
    """Raised when a model and a vectorizer disagree on feature count."""


@dataclass
class LinearModel:
    """Softmax classifier parameters over tf-idf features.

    ``classes`` fixes both the row order of ``weights``/``bias`` and the
    tie-break order at prediction time (earliest class wins ties).
    """

    classes: tuple[TaskType, ...]
    weights: np.ndarray  # shape (C, V)
    bias: np.ndarray  # shape (C,)
    hyper: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        c = len(self.classes)
        if self.weights.shape[0] != c or self.bias.shape != (c,):
            raise ValueError("weight/bias shapes must match the class list")


def _softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    x: np.ndarray,
    y_onehot: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus L2 on weights, with analytic gradients.

    The bias is excluded from the penalty. Returns (loss, dW, db).
    """
    n = x.shape[0]
    probs = _softmax(x @ weights.T + bias)
    # Clip only inside the log; the gradient uses the exact probabilities.
    ce = -np.log(np.clip((probs * y_onehot).sum(axis=1), 1e-300, None)).mean()
    loss = ce + 0.5 * l2_penalty * float((weights**2).sum())
    delta = (probs - y_onehot) / n
    grad_w = delta.T @ x + l2_penalty * weights
    grad_b = delta.sum(axis=0)
    return float(loss), grad_w, grad_b


def train_logreg(
    train: LabeledDataset,
    m: TfidfModel,
    *,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    epochs: int = DEFAULT_EPOCHS,
    l2_penalty: float = DEFAULT_L2_PENALTY,
    seed: int = 0,
) -> LinearModel:
    """Fit softmax cross-entropy weights by full-batch gradient descent.

    Weights start at zero, so the run is deterministic; the seed is recorded
    with the model but only matters for shuffled variants (full-batch descent
    is order-free).
    """
    classes: list[TaskType] = []
    for ex in train:
        if ex.label not in classes:
            classes.append(ex.label)
    if len(classes) < 2:
        raise DegenerateLabels("training data must contain >= 2 distinct labels")

    class_index = {c: i for i, c in enumerate(classes)}
    x = np.stack([embed(m, ex.prompt) for ex in train])
    y = np.zeros((len(train), len(classes)), dtype=np.float64)
    for i, ex in enumerate(train):
        y[i, class_index[ex.label]] = 1.0

    weights = np.zeros((len(classes), m.size), dtype=np.float64)
    bias = np.zeros(len(classes), dtype=np.float64)
    for _ in range(epochs):
        _, grad_w, grad_b = _loss_and_grad(weights, bias, x, y, l2_penalty)
        weights -= learning_rate * grad_w
        bias -= learning_rate * grad_b

    hyper = {
        "learning_rate": learning_rate,
        "epochs": epochs,
        "l2_penalty": l2_penalty,
        "seed": seed,
    }
    return LinearModel(classes=tuple(classes), weights=weights, bias=bias, hyper=hyper)


def predict(
    model: LinearModel, m: TfidfModel, prompt: str
) -> tuple[TaskType, np.ndarray]:
    """Most probable class and the full softmax probability vector.

    Ties break toward the earliest class in ``model.classes`` (argmax picks
    the first maximal entry).
    """
    if model.weights.shape[1] != m.size:
        raise DimensionMismatch(
            f"model has {model.weights.shape[1]} features, vectorizer has {m.size}"
        )
    x = embed(m, prompt)
    probs = _softmax(model.weights @ x + model.bias)
    return model.classes[int(np.argmax(probs))], probs
