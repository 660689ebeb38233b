"""Benchmark dataset ingestion, validation, and a synthetic stand-in generator.

Two versions of the prompt/label benchmark are recognized: V1 (20 rows per
conversion class, 50 unclassifiable, 230 total) and V2 (50 per class, 150
unclassifiable, 600 total). Files are CSV with a "prompt,label" header or
JSON lines with "prompt"/"label" keys.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import random
from pathlib import Path
from typing import Callable

from modalconv.core import ParseFailure, TaskType, parse_task_label
from modalconv.classifier.dataset import LabeledDataset


class DatasetVersion(enum.Enum):
    V1 = "v1"
    V2 = "v2"

    @property
    def expected_counts(self) -> dict[TaskType, int]:
        per_class = 20 if self is DatasetVersion.V1 else 50
        unk = 50 if self is DatasetVersion.V1 else 150
        return {t: (unk if t is TaskType.UNK else per_class) for t in TaskType}

    @property
    def total(self) -> int:
        return sum(self.expected_counts.values())


class DatasetError(ValueError):
    pass


class ParseError(DatasetError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class CountMismatch(DatasetError):
    def __init__(self, label: TaskType, expected: int, found: int):
        super().__init__(f"{label.value}: expected {expected} rows, found {found}")
        self.label = label
        self.expected = expected
        self.found = found


class DuplicatePrompt(DatasetError):
    def __init__(self, row: int, first_row: int, prompt: str):
        super().__init__(f"row {row} repeats the prompt first seen at row {first_row}")
        self.row = row
        self.first_row = first_row
        self.prompt = prompt


def _read_csv_rows(path: Path) -> list[tuple[int, str, str]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "file is empty") from None
        if [h.strip().lower() for h in header] != ["prompt", "label"]:
            raise ParseError(1, f"expected header prompt,label, got {header}")
        rows = []
        for i, fields in enumerate(reader, start=2):
            if not fields:
                continue  # blank line
            if len(fields) != 2:
                raise ParseError(i, f"expected 2 fields, got {len(fields)}")
            rows.append((i, fields[0], fields[1]))
    return rows


def _read_jsonl_rows(path: Path) -> list[tuple[int, str, str]]:
    rows = []
    with path.open(encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(i, f"bad JSON: {exc}") from exc
            if not isinstance(obj, dict) or "prompt" not in obj or "label" not in obj:
                raise ParseError(i, "object must have prompt and label keys")
            rows.append((i, str(obj["prompt"]), str(obj["label"])))
    return rows


def load_dataset(
    path: str | Path, expected: DatasetVersion | None = None
) -> LabeledDataset:
    """Read a dataset file, optionally enforcing a version's class counts."""
    p = Path(path)
    raw = _read_jsonl_rows(p) if p.suffix.lower() in {".jsonl", ".ndjson"} else _read_csv_rows(p)

    seen: dict[str, int] = {}
    examples = []
    for row, prompt, label_text in raw:
        if not prompt.strip():
            raise ParseError(row, "prompt is empty")
        try:
            label = parse_task_label(label_text)
        except ParseFailure:
            raise ParseError(row, f"unknown label {label_text!r}") from None
        if prompt in seen:
            raise DuplicatePrompt(row, seen[prompt], prompt)
        seen[prompt] = row
        examples.append((prompt, label))
    if not examples:
        raise ParseError(1, "no data rows")

    dataset = LabeledDataset(examples)
    if expected is not None:
        found = dataset.label_counts()
        for task in sorted(TaskType, key=lambda t: t.value):
            want = expected.expected_counts[task]
            got = found.get(task, 0)
            if got != want:
                raise CountMismatch(task, want, got)
    return dataset


def write_dataset_csv(dataset: LabeledDataset, path: str | Path) -> Path:
    p = Path(path)
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prompt", "label"])
        for ex in dataset:
            writer.writerow([ex.prompt, ex.label.value])
    return p


def dataset_fingerprint(dataset: LabeledDataset) -> str:
    """Hex hash over the sorted prompt/label pairs; order-insensitive."""
    lines = sorted(f"{ex.label.value}\t{ex.prompt}" for ex in dataset)
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


# --- Synthetic fixture -------------------------------------------------------

# One marker vocabulary per conversion class, pairwise disjoint, so a
# substring-keyword backend can hit 100% and a bag-of-words model separates
# the classes cleanly. Fillers and openers never collide with markers.
FIXTURE_MARKERS: dict[TaskType, tuple[str, ...]] = {
    TaskType.TTS: ("narrate", "speech"),
    TaskType.STT: ("transcribe", "transcript"),
    TaskType.ITT: ("caption", "alttext"),
    TaskType.ITA: ("sonify", "sonified"),
    TaskType.VTT: ("subtitles", "subtitle"),
    TaskType.TTI: ("illustrate", "illustration"),
    TaskType.ATI: ("visualize", "visualization"),
    TaskType.TTV: ("animate", "animation"),
    TaskType.ATV: ("musicvideo", "videoclip"),
}

_OPENERS = ("please", "could you", "i need to", "help me", "can you", "kindly")

_OBJECTS: dict[TaskType, tuple[str, ...]] = {
    TaskType.TTS: ("this article", "my notes", "the report", "this chapter"),
    TaskType.STT: ("the recording", "this voicemail", "my interview", "the lecture"),
    TaskType.ITT: ("this photo", "the screenshot", "my diagram", "the scanned page"),
    TaskType.ITA: ("this picture", "the chart", "my poster", "the painting"),
    TaskType.VTT: ("this clip", "the webinar", "my screencast", "the movie"),
    TaskType.TTI: ("this paragraph", "my essay", "the summary", "this poem"),
    TaskType.ATI: ("this song", "the podcast", "my jingle", "the soundtrack"),
    TaskType.TTV: ("this script", "my storyboard", "the outline", "this pitch"),
    TaskType.ATV: ("this track", "the album", "my mixtape", "the anthem"),
}

_UNK_PROMPTS = (
    "what is the capital of {x}",
    "book a table for {x} tonight",
    "remind me about {x} tomorrow",
    "who won the {x} finals",
    "what is the weather in {x}",
    "recommend a restaurant near {x}",
    "how far away is {x}",
    "tell me a joke about {x}",
    "when does the {x} open",
    "find cheap flights to {x}",
)

_UNK_TOPICS = (
    "france", "oslo", "madrid", "tokyo", "cairo", "lima", "quito", "dublin",
    "seven", "friday", "march", "chess", "tennis", "garden", "harbor", "museum",
    "bakery", "october", "denver", "library", "zurich", "monday", "cricket",
    "airport",
)

_FILLERS = ("today", "right away", "when possible", "for work", "for school", "")


def fixture_keyword_rules() -> dict[TaskType, tuple[str, ...]]:
    """Rules that make a keyword backend exact on any generated fixture."""
    return dict(FIXTURE_MARKERS)


def generate_synthetic_fixture(seed: int, version: DatasetVersion) -> LabeledDataset:
    """Deterministic template-based dataset with the version's exact counts."""
    rng = random.Random(seed)
    examples: list[tuple[str, TaskType]] = []
    used: set[str] = set()

    def add_unique(make: Callable[[], str], label: TaskType) -> None:
        # Rejection sampling keeps prompts unique; the serial suffix is a
        # last-resort guarantee, not the common path.
        for _ in range(64):
            prompt = make()
            if prompt not in used:
                break
        else:
            prompt = f"{make()} request {len(used)}"
        used.add(prompt)
        examples.append((prompt, label))

    for task in sorted(FIXTURE_MARKERS, key=lambda t: t.value):
        markers = FIXTURE_MARKERS[task]
        objects = _OBJECTS[task]
        for _ in range(version.expected_counts[task]):
            add_unique(
                lambda: " ".join(
                    part
                    for part in (
                        rng.choice(_OPENERS),
                        rng.choice(markers),
                        rng.choice(objects),
                        rng.choice(_FILLERS),
                    )
                    if part
                ),
                task,
            )
    for _ in range(version.expected_counts[TaskType.UNK]):
        add_unique(
            lambda: rng.choice(_UNK_PROMPTS).format(x=rng.choice(_UNK_TOPICS)),
            TaskType.UNK,
        )
    return LabeledDataset(examples)
