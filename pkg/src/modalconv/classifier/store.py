"""Model persistence: one self-describing JSON file per trained model.

The container holds the vocabulary, idf vector, class list, parameters, and
the hyperparameters used, under a versioned header. JSON floats serialize via
``repr`` and therefore round-trip bit-exactly; keys are sorted so identical
models produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from modalconv.core import TaskType
from modalconv.classifier.linear import LinearModel, predict
from modalconv.classifier.neighbors import DEFAULT_K, cosine_similarities, knn_predict
from modalconv.classifier.vectorize import TfidfModel, Vocabulary, embed

FORMAT_NAME = "modalconv-model"
FORMAT_VERSION = 1


@dataclass
class ModelBundle:
    """A persisted classifier: tf-idf vectorizer plus one predictor head."""

    kind: str  # "logreg" | "knn"
    tfidf: TfidfModel
    linear: LinearModel | None = None
    knn_vectors: np.ndarray | None = None
    knn_labels: tuple[TaskType, ...] | None = None
    knn_k: int = DEFAULT_K

    def __post_init__(self) -> None:
        if self.kind == "logreg":
            if self.linear is None:
                raise ValueError("logreg bundle requires a LinearModel")
        elif self.kind == "knn":
            if self.knn_vectors is None or self.knn_labels is None:
                raise ValueError("knn bundle requires vectors and labels")
        else:
            raise ValueError(f"unknown bundle kind {self.kind!r}")

    def predict(self, prompt: str) -> tuple[TaskType, dict[str, float]]:
        """Predicted task plus per-class scores (probabilities or vote shares)."""
        if self.kind == "logreg":
            assert self.linear is not None
            label, probs = predict(self.linear, self.tfidf, prompt)
            scores = {c.value: float(p) for c, p in zip(self.linear.classes, probs)}
            return label, scores
        assert self.knn_vectors is not None and self.knn_labels is not None
        query = embed(self.tfidf, prompt)
        label = knn_predict(self.knn_vectors, self.knn_labels, query, self.knn_k)
        sims = cosine_similarities(self.knn_vectors, query)
        order = np.argsort(-sims, kind="stable")[: self.knn_k]
        scores: dict[str, float] = {}
        for i in order:
            code = self.knn_labels[int(i)].value
            scores[code] = scores.get(code, 0.0) + 1.0 / self.knn_k
        return label, scores


def save_model(bundle: ModelBundle, path: str | Path) -> None:
    doc: dict[str, Any] = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "kind": bundle.kind,
        "tfidf": {
            "vocabulary": bundle.tfidf.vocabulary.tokens,
            "idf": bundle.tfidf.idf.tolist(),
        },
    }
    if bundle.kind == "logreg":
        assert bundle.linear is not None
        doc["logreg"] = {
            "classes": [c.value for c in bundle.linear.classes],
            "weights": bundle.linear.weights.tolist(),
            "bias": bundle.linear.bias.tolist(),
            "hyper": bundle.linear.hyper,
        }
    else:
        assert bundle.knn_vectors is not None and bundle.knn_labels is not None
        doc["knn"] = {
            "k": bundle.knn_k,
            "labels": [c.value for c in bundle.knn_labels],
            "vectors": bundle.knn_vectors.tolist(),
        }
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> ModelBundle:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} file: {path}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')}")
    tfidf = TfidfModel(
        vocabulary=Vocabulary(doc["tfidf"]["vocabulary"]),
        idf=np.array(doc["tfidf"]["idf"], dtype=np.float64),
    )
    kind = doc["kind"]
    if kind == "logreg":
        head = doc["logreg"]
        linear = LinearModel(
            classes=tuple(TaskType(c) for c in head["classes"]),
            weights=np.array(head["weights"], dtype=np.float64),
            bias=np.array(head["bias"], dtype=np.float64),
            hyper=dict(head.get("hyper", {})),
        )
        return ModelBundle(kind="logreg", tfidf=tfidf, linear=linear)
    head = doc["knn"]
    return ModelBundle(
        kind="knn",
        tfidf=tfidf,
        knn_vectors=np.array(head["vectors"], dtype=np.float64),
        knn_labels=tuple(TaskType(c) for c in head["labels"]),
        knn_k=int(head["k"]),
    )
