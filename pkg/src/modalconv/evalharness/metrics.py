"""Classification metrics over benchmark outcomes.

Predictions that produced no valid label are binned into a reserved INVALID
column of the confusion matrix. INVALID never matches a gold label, so failed
predictions count against accuracy and recall rather than being dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Mapping, Sequence

import numpy as np

from modalconv.core import TaskType
from modalconv.interpreter import ClassificationOutcome, failure_rate

INVALID_LABEL = "INVALID"

GOLD_LABELS: tuple[str, ...] = tuple(t.value for t in TaskType)
PREDICTED_LABELS: tuple[str, ...] = GOLD_LABELS + (INVALID_LABEL,)


class LengthMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


class ConfusionMatrix:
    """Gold rows (the 10 codes) by predicted columns (10 codes + INVALID)."""

    def __init__(self, counts: np.ndarray):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (len(GOLD_LABELS), len(PREDICTED_LABELS)):
            raise ValueError(f"counts must be {len(GOLD_LABELS)}x{len(PREDICTED_LABELS)}")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        self.counts = counts

    gold_labels = GOLD_LABELS
    predicted_labels = PREDICTED_LABELS

    def count(self, gold: str, predicted: str) -> int:
        return int(
            self.counts[GOLD_LABELS.index(gold), PREDICTED_LABELS.index(predicted)]
        )

    def row_sum(self, gold: str) -> int:
        return int(self.counts[GOLD_LABELS.index(gold)].sum())

    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConfusionMatrix) and np.array_equal(
            self.counts, other.counts
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "gold_labels": list(GOLD_LABELS),
            "predicted_labels": list(PREDICTED_LABELS),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ConfusionMatrix":
        return cls(np.array(doc["counts"], dtype=np.int64))


@dataclass
class EvalReport:
    accuracy: float
    per_class: dict[str, ClassMetrics]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    failure_rate: float
    confusion: ConfusionMatrix
    backend_name: str
    dataset_fingerprint: str
    timestamp: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "per_class": {
                code: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for code, m in self.per_class.items()
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
            "failure_rate": self.failure_rate,
            "confusion": self.confusion.to_dict(),
            "backend": self.backend_name,
            "dataset_fingerprint": self.dataset_fingerprint,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "EvalReport":
        return cls(
            accuracy=doc["accuracy"],
            per_class={
                code: ClassMetrics(
                    precision=m["precision"],
                    recall=m["recall"],
                    f1=m["f1"],
                    support=m["support"],
                )
                for code, m in doc["per_class"].items()
            },
            weighted_precision=doc["weighted"]["precision"],
            weighted_recall=doc["weighted"]["recall"],
            weighted_f1=doc["weighted"]["f1"],
            failure_rate=doc["failure_rate"],
            confusion=ConfusionMatrix.from_dict(doc["confusion"]),
            backend_name=doc["backend"],
            dataset_fingerprint=doc["dataset_fingerprint"],
            timestamp=doc["timestamp"],
        )


def _zero_safe(num: float, den: float) -> float:
    return num / den if den else 0.0


def compute_metrics(
    gold: Sequence[TaskType],
    outcomes: Sequence[ClassificationOutcome],
    *,
    backend_name: str = "",
    dataset_fingerprint: str = "",
) -> EvalReport:
    if len(gold) != len(outcomes):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(outcomes)} outcomes")
    if not gold:
        raise EmptyInput("nothing to score")

    counts = np.zeros((len(GOLD_LABELS), len(PREDICTED_LABELS)), dtype=np.int64)
    for g, o in zip(gold, outcomes):
        predicted = o.parsed.value if o.parsed is not None else INVALID_LABEL
        counts[GOLD_LABELS.index(g.value), PREDICTED_LABELS.index(predicted)] += 1
    matrix = ConfusionMatrix(counts)

    n = len(gold)
    accuracy = float(np.trace(counts[:, : len(GOLD_LABELS)])) / n

    per_class: dict[str, ClassMetrics] = {}
    weighted_p = weighted_r = weighted_f = 0.0
    for i, code in enumerate(GOLD_LABELS):
        tp = float(counts[i, i])
        support = int(counts[i].sum())
        precision = _zero_safe(tp, float(counts[:, i].sum()))
        recall = _zero_safe(tp, float(support))
        f1 = _zero_safe(2 * precision * recall, precision + recall)
        per_class[code] = ClassMetrics(precision, recall, f1, support)
        weighted_p += support / n * precision
        weighted_r += support / n * recall
        weighted_f += support / n * f1

    return EvalReport(
        accuracy=accuracy,
        per_class=per_class,
        weighted_precision=weighted_p,
        weighted_recall=weighted_r,
        weighted_f1=weighted_f,
        failure_rate=failure_rate(outcomes),
        confusion=matrix,
        backend_name=backend_name,
        dataset_fingerprint=dataset_fingerprint,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
