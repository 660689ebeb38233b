"""Dataset handling, benchmark execution, and metric reporting."""

from modalconv.evalharness.bench import (
    DEFAULT_MAX_IN_FLIGHT,
    REPORT_FORMATS,
    emit_report,
    run_benchmark,
)
from modalconv.evalharness.data import (
    CountMismatch,
    DatasetError,
    DatasetVersion,
    DuplicatePrompt,
    FIXTURE_MARKERS,
    ParseError,
    dataset_fingerprint,
    fixture_keyword_rules,
    generate_synthetic_fixture,
    load_dataset,
    write_dataset_csv,
)
from modalconv.evalharness.metrics import (
    ClassMetrics,
    ConfusionMatrix,
    EmptyInput,
    EvalReport,
    GOLD_LABELS,
    INVALID_LABEL,
    LengthMismatch,
    PREDICTED_LABELS,
    compute_metrics,
)

__all__ = [
    "ClassMetrics",
    "ConfusionMatrix",
    "CountMismatch",
    "DEFAULT_MAX_IN_FLIGHT",
    "DatasetError",
    "DatasetVersion",
    "DuplicatePrompt",
    "EmptyInput",
    "EvalReport",
    "FIXTURE_MARKERS",
    "GOLD_LABELS",
    "INVALID_LABEL",
    "LengthMismatch",
    "PREDICTED_LABELS",
    "ParseError",
    "REPORT_FORMATS",
    "compute_metrics",
    "dataset_fingerprint",
    "emit_report",
    "fixture_keyword_rules",
    "generate_synthetic_fixture",
    "load_dataset",
    "run_benchmark",
    "write_dataset_csv",
]
