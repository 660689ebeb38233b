import csv
import json
import random

import pytest

from modalconv.classifier import LabeledDataset
from modalconv.core import TaskType
from modalconv.evalharness import (
    CountMismatch,
    DatasetVersion,
    DuplicatePrompt,
    EmptyInput,
    EvalReport,
    GOLD_LABELS,
    INVALID_LABEL,
    LengthMismatch,
    ParseError,
    compute_metrics,
    dataset_fingerprint,
    emit_report,
    fixture_keyword_rules,
    generate_synthetic_fixture,
    load_dataset,
    run_benchmark,
    write_dataset_csv,
)
from modalconv.interpreter import ClassificationOutcome, make_keyword_backend


def ok(task):
    return ClassificationOutcome(task.value, task)


def bad():
    return ClassificationOutcome("no idea", None)


# --- metric oracle ------------------------------------------------------------
# Pure-python re-derivation from first principles; shares nothing with the
# numpy implementation under test.


def oracle(gold, predicted):
    n = len(gold)
    accuracy = sum(1 for g, p in zip(gold, predicted) if p == g) / n
    w_prec = w_rec = w_f1 = 0.0
    for code in GOLD_LABELS:
        tp = sum(1 for g, p in zip(gold, predicted) if g == code and p == code)
        support = sum(1 for g in gold if g == code)
        hits = sum(1 for p in predicted if p == code)
        prec = tp / hits if hits else 0.0
        rec = tp / support if support else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        w_prec += support / n * prec
        w_rec += support / n * rec
        w_f1 += support / n * f1
    fail = sum(1 for p in predicted if p is None) / n
    return accuracy, w_prec, w_rec, w_f1, fail


def as_outcomes(predicted):
    return [bad() if p is None else ok(TaskType(p)) for p in predicted]


def test_metrics_match_oracle_on_random_instances():
    rng = random.Random(20260818)
    codes = [t.value for t in TaskType]
    for _ in range(60):
        classes = rng.sample(codes, rng.randint(2, 6))
        n = rng.randint(1, 50)
        gold = [rng.choice(classes) for _ in range(n)]
        predicted = [
            None if rng.random() < 0.1 else rng.choice(codes) for _ in range(n)
        ]
        report = compute_metrics(
            [TaskType(g) for g in gold], as_outcomes(predicted)
        )
        acc, wp, wr, wf, fail = oracle(gold, predicted)
        assert report.accuracy == pytest.approx(acc, abs=1e-12)
        assert report.weighted_precision == pytest.approx(wp, abs=1e-12)
        assert report.weighted_recall == pytest.approx(wr, abs=1e-12)
        assert report.weighted_f1 == pytest.approx(wf, abs=1e-12)
        assert report.failure_rate == fail


def test_metrics_hand_worked_example():
    gold = [TaskType.TTS, TaskType.TTS, TaskType.STT, TaskType.STT]
    outcomes = [ok(TaskType.TTS), ok(TaskType.STT), ok(TaskType.STT), ok(TaskType.STT)]
    report = compute_metrics(gold, outcomes)
    assert report.accuracy == pytest.approx(0.75)
    tts = report.per_class["TTS"]
    stt = report.per_class["STT"]
    assert (tts.precision, tts.recall) == (1.0, 0.5)
    assert tts.f1 == pytest.approx(2 / 3)
    assert (stt.recall, stt.support) == (1.0, 2)
    assert stt.precision == pytest.approx(2 / 3)
    assert stt.f1 == pytest.approx(4 / 5)
    assert report.weighted_f1 == pytest.approx(0.5 * (2 / 3) + 0.5 * (4 / 5))
    assert report.weighted_f1 == pytest.approx(0.7333333333333334)


def test_metrics_all_failed():
    gold = [TaskType.TTS, TaskType.STT, TaskType.ITT]
    report = compute_metrics(gold, [bad(), bad(), bad()])
    assert report.accuracy == 0.0
    assert report.failure_rate == 1.0
    assert report.weighted_precision == 0.0
    invalid_column = sum(
        report.confusion.count(code, INVALID_LABEL) for code in GOLD_LABELS
    )
    assert invalid_column == 3


def test_weighted_recall_equals_accuracy():
    # tp summed over classes is exactly the number of correct predictions
    rng = random.Random(7)
    codes = [t.value for t in TaskType]
    gold = [rng.choice(codes) for _ in range(40)]
    predicted = [None if rng.random() < 0.2 else rng.choice(codes) for _ in range(40)]
    report = compute_metrics([TaskType(g) for g in gold], as_outcomes(predicted))
    assert report.weighted_recall == pytest.approx(report.accuracy, abs=1e-12)


def test_confusion_row_sums_are_support():
    gold = [TaskType.TTS] * 3 + [TaskType.STT] * 2
    outcomes = [ok(TaskType.TTS), ok(TaskType.STT), bad(), ok(TaskType.STT), bad()]
    report = compute_metrics(gold, outcomes)
    assert report.confusion.row_sum("TTS") == 3 == report.per_class["TTS"].support
    assert report.confusion.row_sum("STT") == 2
    assert report.confusion.total() == 5


def test_metrics_reject_length_mismatch():
    with pytest.raises(LengthMismatch):
        compute_metrics([TaskType.TTS], [ok(TaskType.TTS), ok(TaskType.TTS)])


def test_metrics_reject_empty():
    with pytest.raises(EmptyInput):
        compute_metrics([], [])


def test_report_dict_round_trip():
    gold = [TaskType.TTS, TaskType.STT, TaskType.ITT, TaskType.ITT]
    outcomes = [ok(TaskType.TTS), bad(), ok(TaskType.ITT), ok(TaskType.TTS)]
    report = compute_metrics(
        gold, outcomes, backend_name="probe", dataset_fingerprint="abc123"
    )
    rebuilt = EvalReport.from_dict(report.to_dict())
    assert rebuilt == report
    assert rebuilt.to_dict() == report.to_dict()


# --- dataset io -------------------------------------------------------------------


def test_load_csv_happy_path(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text(
        'prompt,label\n"turn this, please, into speech",TTS\nmake a picture,TTI\n'
    )
    ds = load_dataset(p)
    assert ds.prompts() == ["turn this, please, into speech", "make a picture"]
    assert ds.labels() == [TaskType.TTS, TaskType.TTI]


def test_load_jsonl_happy_path(tmp_path):
    p = tmp_path / "d.jsonl"
    rows = [
        {"prompt": "narrate my essay", "label": "TTS"},
        {"prompt": "what does the audio say", "label": "STT"},
    ]
    p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    ds = load_dataset(p)
    assert len(ds) == 2
    assert ds.labels() == [TaskType.TTS, TaskType.STT]


def test_load_rejects_bad_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("text,target\nhello,TTS\n")
    with pytest.raises(ParseError):
        load_dataset(p)


def test_load_reports_row_of_unknown_label(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("prompt,label\nfine,TTS\nbroken,XYZ\n")
    with pytest.raises(ParseError) as err:
        load_dataset(p)
    assert err.value.row == 3
    assert "XYZ" in str(err.value)


def test_load_rejects_empty_prompt(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text('prompt,label\n"   ",TTS\n')
    with pytest.raises(ParseError):
        load_dataset(p)


def test_load_rejects_empty_file(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("prompt,label\n")
    with pytest.raises(ParseError):
        load_dataset(p)


def test_load_rejects_duplicate_prompt(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("prompt,label\nsame words,TTS\nsame words,STT\n")
    with pytest.raises(DuplicatePrompt) as err:
        load_dataset(p)
    assert (err.value.first_row, err.value.row) == (2, 3)


def test_count_enforcement_names_offending_class(tmp_path):
    fixture = generate_synthetic_fixture(3, DatasetVersion.V1)
    trimmed = LabeledDataset(
        [ex for ex in fixture if ex.label is not TaskType.TTS]
        + [ex for ex in fixture if ex.label is TaskType.TTS][:-1]
    )
    p = write_dataset_csv(trimmed, tmp_path / "short.csv")
    with pytest.raises(CountMismatch) as err:
        load_dataset(p, expected=DatasetVersion.V1)
    assert err.value.label is TaskType.TTS
    assert (err.value.expected, err.value.found) == (20, 19)


def test_version_totals():
    assert DatasetVersion.V1.total == 230
    assert DatasetVersion.V2.total == 600
    assert DatasetVersion.V1.expected_counts[TaskType.UNK] == 50
    assert DatasetVersion.V2.expected_counts[TaskType.TTS] == 50


def test_csv_round_trip(tmp_path):
    fixture = generate_synthetic_fixture(11, DatasetVersion.V1)
    p = write_dataset_csv(fixture, tmp_path / "v1.csv")
    again = load_dataset(p, expected=DatasetVersion.V1)
    assert again.prompts() == fixture.prompts()
    assert again.labels() == fixture.labels()


def test_fingerprint_ignores_row_order():
    fixture = generate_synthetic_fixture(5, DatasetVersion.V1)
    shuffled = list(fixture)
    random.Random(0).shuffle(shuffled)
    assert dataset_fingerprint(LabeledDataset(shuffled)) == dataset_fingerprint(fixture)


def test_fingerprint_sees_label_changes():
    ds_a = LabeledDataset([("hello", TaskType.TTS)])
    ds_b = LabeledDataset([("hello", TaskType.STT)])
    assert dataset_fingerprint(ds_a) != dataset_fingerprint(ds_b)


# --- synthetic fixture ----------------------------------------------------------


def test_fixture_counts_and_uniqueness():
    for version in DatasetVersion:
        fixture = generate_synthetic_fixture(1, version)
        assert len(fixture) == version.total
        counts = fixture.label_counts()
        assert counts == version.expected_counts
        assert len(set(fixture.prompts())) == len(fixture)


def test_fixture_seed_controls_content():
    a = generate_synthetic_fixture(1, DatasetVersion.V1)
    b = generate_synthetic_fixture(1, DatasetVersion.V1)
    c = generate_synthetic_fixture(2, DatasetVersion.V1)
    assert dataset_fingerprint(a) == dataset_fingerprint(b)
    assert dataset_fingerprint(a) != dataset_fingerprint(c)


def test_fixture_markers_are_classifiable():
    fixture = generate_synthetic_fixture(9, DatasetVersion.V1)
    backend = make_keyword_backend(fixture_keyword_rules())
    report = run_benchmark(backend, fixture)
    assert report.accuracy == 1.0
    assert report.failure_rate == 0.0


# --- benchmark runner --------------------------------------------------------------


class _AnswerSheet:
    """Looks the gold label up by prompt; fails on the designated set."""

    name = "scripted"

    def __init__(self, dataset, fail_on=frozenset()):
        self.answers = {ex.prompt: ex.label.value for ex in dataset}
        self.fail_on = frozenset(fail_on)

    def classify_raw(self, prompt):
        if prompt in self.fail_on:
            return "cannot answer that"
        return self.answers[prompt]


def test_benchmark_perfect_backend():
    ds = generate_synthetic_fixture(2, DatasetVersion.V1)
    report = run_benchmark(_AnswerSheet(ds), ds)
    assert report.accuracy == 1.0
    assert report.failure_rate == 0.0
    assert report.backend_name == "scripted"
    assert report.dataset_fingerprint == dataset_fingerprint(ds)


def test_benchmark_failure_rate_is_exact():
    ds = generate_synthetic_fixture(2, DatasetVersion.V1)
    doomed = ds.prompts()[:9]
    report = run_benchmark(_AnswerSheet(ds, fail_on=doomed), ds)
    assert report.failure_rate == 9 / 230


def test_benchmark_insensitive_to_pool_width():
    ds = generate_synthetic_fixture(4, DatasetVersion.V1)
    backend = _AnswerSheet(ds, fail_on=ds.prompts()[::30])
    narrow = run_benchmark(backend, ds, max_in_flight=1)
    wide = run_benchmark(backend, ds, max_in_flight=8)
    a, b = narrow.to_dict(), wide.to_dict()
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_benchmark_rejects_empty_dataset():
    # construction allows empty; running a benchmark on it does not
    probe = _AnswerSheet(LabeledDataset([("x", TaskType.TTS)]))
    with pytest.raises(ValueError):
        run_benchmark(probe, LabeledDataset([]))


def test_benchmark_rejects_bad_pool_width():
    ds = LabeledDataset([("x", TaskType.TTS)])
    with pytest.raises(ValueError):
        run_benchmark(_AnswerSheet(ds), ds, max_in_flight=0)


# --- report emission -----------------------------------------------------------------


def small_report():
    gold = [TaskType.TTS, TaskType.TTS, TaskType.STT, TaskType.STT]
    outcomes = [ok(TaskType.TTS), ok(TaskType.STT), ok(TaskType.STT), bad()]
    return compute_metrics(gold, outcomes, backend_name="probe")


def test_emit_json_is_lossless(tmp_path):
    report = small_report()
    path = emit_report(report, "json", tmp_path / "r.json")
    rebuilt = EvalReport.from_dict(json.loads(path.read_text()))
    assert rebuilt == report


def test_emit_csv_trims_to_active_labels(tmp_path):
    report = small_report()
    path = emit_report(report, "csv", tmp_path / "r.csv")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["gold", "TTS", "STT", INVALID_LABEL]
    assert rows[1] == ["TTS", "1", "1", "0"]
    assert rows[2] == ["STT", "0", "1", "1"]


def test_emit_csv_omits_invalid_when_clean(tmp_path):
    gold = [TaskType.TTS, TaskType.STT]
    report = compute_metrics(gold, [ok(TaskType.TTS), ok(TaskType.STT)])
    path = emit_report(report, "csv", tmp_path / "r.csv")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert INVALID_LABEL not in rows[0]


def test_emit_markdown_summary_table(tmp_path):
    report = small_report()
    path = emit_report(report, "markdown", tmp_path / "r.md")
    text = path.read_text()
    assert text.splitlines()[0] == "| backend | accuracy | precision | recall | f1 | failure rate |"
    assert "| probe |" in text
    assert "| 0.500 |" in text  # accuracy of the 4-item example


def test_emit_rejects_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit_report(small_report(), "yaml", tmp_path / "r.yaml")
