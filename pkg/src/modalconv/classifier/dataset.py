"""Labeled prompt/task datasets and the stratified train/test split."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from modalconv.core import TaskType


class InvalidFraction(ValueError):
    """Raised when a test fraction is outside the open interval (0, 1)."""


@dataclass(frozen=True)
class LabeledExample:
    prompt: str
    label: TaskType


class LabeledDataset:
    """An ordered list of (prompt, label) pairs.

    Prompts must be non-empty after trimming and labels must come from the
    ten-way task set; both are checked at construction.
    """

    def __init__(self, examples: Iterable[LabeledExample | tuple[str, TaskType]]):
        rows: list[LabeledExample] = []
        for ex in examples:
            if not isinstance(ex, LabeledExample):
                prompt, label = ex
                ex = LabeledExample(prompt, label)
            if not ex.prompt.strip():
                raise ValueError("dataset prompts must be non-empty")
            if not isinstance(ex.label, TaskType):
                raise ValueError(f"label must be a TaskType, got {ex.label!r}")
            rows.append(ex)
        self.examples: list[LabeledExample] = rows

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[LabeledExample]:
        return iter(self.examples)

    def __getitem__(self, i: int) -> LabeledExample:
        return self.examples[i]

    def prompts(self) -> list[str]:
        return [ex.prompt for ex in self.examples]

    def labels(self) -> list[TaskType]:
        return [ex.label for ex in self.examples]

    def label_counts(self) -> dict[TaskType, int]:
        counts: dict[TaskType, int] = {}
        for ex in self.examples:
            counts[ex.label] = counts.get(ex.label, 0) + 1
        return counts


def split_dataset(
    d: LabeledDataset, test_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified, seeded train/test split.

    Per label, floor(n_label * test_fraction) examples go to test (at least 1
    whenever the label has >= 2 examples); selection is a deterministic
    seeded shuffle. Train and test partition the input: same multiset of
    labels, disjoint rows, original row order preserved within each side.
    """
    if not (0.0 < test_fraction < 1.0):
        raise InvalidFraction(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = random.Random(seed)
    by_label: dict[TaskType, list[int]] = {}
    for i, ex in enumerate(d):
        by_label.setdefault(ex.label, []).append(i)

    test_indices: set[int] = set()
    # Iterate labels in code order so the rng consumption is data-order free.
    for label in sorted(by_label, key=lambda t: t.value):
        indices = list(by_label[label])
        rng.shuffle(indices)
        n = len(indices)
        n_test = math.floor(n * test_fraction)
        if n >= 2 and n_test == 0:
            n_test = 1
        n_test = min(n_test, n - 1)  # never empty a label's train side
        test_indices.update(indices[:n_test])

    train = LabeledDataset(ex for i, ex in enumerate(d) if i not in test_indices)
    test = LabeledDataset(ex for i, ex in enumerate(d) if i in test_indices)
    return train, test
