"""k-nearest-neighbors over cosine similarity."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from modalconv.core import TaskType

DEFAULT_K = 5


class EmptyTrainingSet(ValueError):
    """Raised when no training vectors are available."""


class KTooLarge(ValueError):
    """Raised when k exceeds the number of training vectors."""


def cosine_similarities(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine similarity of ``query`` against each row; 0 where a norm is 0."""
    norms = np.linalg.norm(vectors, axis=1)
    q_norm = float(np.linalg.norm(query))
    denom = norms * q_norm
    sims = np.zeros(vectors.shape[0], dtype=np.float64)
    nonzero = denom > 0.0
    if q_norm > 0.0:
        sims[nonzero] = (vectors[nonzero] @ query) / denom[nonzero]
    return sims


def knn_predict(
    vectors: np.ndarray,
    labels: Sequence[TaskType],
    query: np.ndarray,
    k: int = DEFAULT_K,
) -> TaskType:
    """Majority label among the k most cosine-similar training vectors.

    Ties on similarity go to the lower training index (stable sort); ties on
    vote count go to the lexicographically smallest label code.
    """
    n = vectors.shape[0] if vectors.ndim == 2 else 0
    if n == 0 or len(labels) == 0:
        raise EmptyTrainingSet("knn requires at least one training vector")
    if n != len(labels):
        raise ValueError("vectors and labels must have equal length")
    if k < 1 or k > n:
        raise KTooLarge(f"k={k} with {n} training vectors")

    sims = cosine_similarities(vectors, query)
    order = np.argsort(-sims, kind="stable")  # stable: equal sims keep index order
    votes = Counter(labels[int(i)] for i in order[:k])
    top = max(votes.values())
    return min((lbl for lbl, v in votes.items() if v == top), key=lambda t: t.value)
