"""Benchmark driver and report emission."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from modalconv.classifier.dataset import LabeledDataset
from modalconv.interpreter import InterpreterBackend, classify
from modalconv.evalharness.data import dataset_fingerprint
from modalconv.evalharness.metrics import (
    EvalReport,
    GOLD_LABELS,
    INVALID_LABEL,
    compute_metrics,
)

DEFAULT_MAX_IN_FLIGHT = 4

REPORT_FORMATS = ("json", "csv", "markdown")


def run_benchmark(
    backend: InterpreterBackend,
    dataset: LabeledDataset,
    *,
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
) -> EvalReport:
    """Classify every prompt once and score the outcomes.

    Requests fan out over a small thread pool; map() preserves prompt order,
    so gold/outcome alignment never depends on completion order.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be at least 1")
    prompts = dataset.prompts()
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        outcomes = list(pool.map(lambda p: classify(backend, p), prompts))
    return compute_metrics(
        dataset.labels(),
        outcomes,
        backend_name=backend.name,
        dataset_fingerprint=dataset_fingerprint(dataset),
    )


def _emit_json(report: EvalReport, path: Path) -> None:
    path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _emit_csv(report: EvalReport, path: Path) -> None:
    # Confusion matrix trimmed to labels that actually occur; the INVALID
    # column appears only when some prediction failed.
    m = report.confusion
    active = [
        code
        for i, code in enumerate(GOLD_LABELS)
        if m.counts[i].sum() > 0 or m.counts[:, i].sum() > 0
    ]
    with_invalid = int(m.counts[:, len(GOLD_LABELS)].sum()) > 0
    columns = active + ([INVALID_LABEL] if with_invalid else [])
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gold"] + columns)
        for code in active:
            writer.writerow([code] + [m.count(code, col) for col in columns])


def _emit_markdown(report: EvalReport, path: Path) -> None:
    header = "| backend | accuracy | precision | recall | f1 | failure rate |"
    rule = "|---|---|---|---|---|---|"
    row = (
        f"| {report.backend_name or 'unnamed'} "
        f"| {report.accuracy:.3f} "
        f"| {report.weighted_precision:.3f} "
        f"| {report.weighted_recall:.3f} "
        f"| {report.weighted_f1:.3f} "
        f"| {report.failure_rate:.3f} |"
    )
    path.write_text("\n".join([header, rule, row]) + "\n", encoding="utf-8")


def emit_report(report: EvalReport, fmt: str, path: str | Path) -> Path:
    """Write the report as json (lossless), csv (confusion matrix), or markdown."""
    p = Path(path)
    if fmt == "json":
        _emit_json(report, p)
    elif fmt == "csv":
        _emit_csv(report, p)
    elif fmt == "markdown":
        _emit_markdown(report, p)
    else:
        raise ValueError(f"format must be one of {REPORT_FORMATS}, got {fmt!r}")
    return p
