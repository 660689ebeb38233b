"""
Benchmarking a backend and writing the report
=============================================

Scoring is exact: the harness classifies every labeled prompt once, counts
failures as their own reserved column, and the metrics are plain confusion
matrix arithmetic. Reports serialize to json, csv, or markdown.
"""

import json
import tempfile
from pathlib import Path

from modalconv.core import TaskType
from modalconv.evalharness import (
    DatasetVersion,
    compute_metrics,
    emit_report,
    fixture_keyword_rules,
    generate_synthetic_fixture,
    run_benchmark,
)
from modalconv.interpreter import classify, make_keyword_backend

# 1. Dataset + backend. The small fixture has 230 prompts over ten codes;
#    the keyword backend is built to be perfect on it, which makes the
#    bookkeeping easy to eyeball.
data = generate_synthetic_fixture(seed=5, version=DatasetVersion.V1)
backend = make_keyword_backend(fixture_keyword_rules())

report = run_benchmark(backend, data, max_in_flight=8)
print(f"accuracy      {report.accuracy:.4f}")
print(f"weighted f1   {report.weighted_f1:.4f}")
print(f"failure rate  {report.failure_rate:.4f}")

# 2. A deliberately imperfect run, to show the failure accounting. The
#    crippled backend answers junk for any prompt mentioning subtitles.
class Crippled:
    name = "crippled"

    def classify_raw(self, prompt: str) -> str:
        if "subtitle" in prompt:
            return "bizarre model output"
        return backend.classify_raw(prompt)

gold = data.labels()
outcomes = [classify(Crippled(), p) for p in data.prompts()]
worse = compute_metrics(gold, outcomes, backend_name="crippled")
n_vtt = sum(1 for g in gold if g is TaskType.VTT)
print(f"\ncrippled: failure rate {worse.failure_rate:.4f}"
      f" ({n_vtt} VTT prompts / {len(data)})")

# Failures land in the reserved INVALID column, never in another class,
# so precision for the real codes is unaffected.
vtt_row = {
    pred: worse.confusion.count("VTT", pred)
    for pred in worse.confusion.predicted_labels
    if worse.confusion.count("VTT", pred)
}
print("VTT row of the confusion matrix:", vtt_row)

# 3. Emit all three formats and peek at each.
scratch = Path(tempfile.mkdtemp(prefix="report-demo-"))
for fmt in ("json", "csv", "markdown"):
    path = emit_report(worse, fmt, scratch / f"report.{fmt}")
    print(f"\n--- {path.name}")
    if fmt == "json":
        doc = json.loads(path.read_text())
        print(json.dumps(doc["weighted"], indent=2))
    else:
        print("\n".join(path.read_text().splitlines()[:4]))
