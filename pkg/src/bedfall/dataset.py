"""Labeled window collections shared by the ingest, synth, augment and
evaluation code."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .signal import Window

LABEL_NOISE = "noise"
LABEL_OBJECT = "object-fall"
LABEL_HUMAN = "human-fall"
CLASSES = (LABEL_NOISE, LABEL_OBJECT, LABEL_HUMAN)


@dataclass
class WindowMeta:
    event_id: int | None = None
    setting_id: int | None = None


@dataclass(frozen=True)
class Provenance:
    """Marks a window produced by augmentation from ``source`` (an index into
    the pre-augmentation dataset)."""

    source: int
    method: str
    copy: int


@dataclass
class LabeledDataset:
    """Parallel sequences of windows, class labels, metadata and provenance."""

    windows: list[Window]
    labels: list[str]
    meta: list[WindowMeta] = field(default=None)
    provenance: list[Provenance | None] = field(default=None)

    def __post_init__(self):
        if self.meta is None:
            self.meta = [WindowMeta() for _ in self.windows]
        if self.provenance is None:
            self.provenance = [None] * len(self.windows)
        n = len(self.windows)
        if not (len(self.labels) == len(self.meta) == len(self.provenance) == n):
            raise ValueError("windows, labels, meta and provenance must have equal length")
        for lab in self.labels:
            if lab not in CLASSES:
                raise ValueError(f"unknown class label {lab!r}")

    def __len__(self) -> int:
        return len(self.windows)

    def subset(self, indices) -> "LabeledDataset":
        """New dataset referencing the selected windows (no copies)."""
        idx = [int(i) for i in indices]
        return LabeledDataset(
            windows=[self.windows[i] for i in idx],
            labels=[self.labels[i] for i in idx],
            meta=[replace(self.meta[i]) for i in idx],
            provenance=[self.provenance[i] for i in idx],
        )

    @staticmethod
    def concat(*datasets: "LabeledDataset") -> "LabeledDataset":
        return LabeledDataset(
            windows=[w for d in datasets for w in d.windows],
            labels=[l for d in datasets for l in d.labels],
            meta=[replace(m) for d in datasets for m in d.meta],
            provenance=[p for d in datasets for p in d.provenance],
        )

    def class_counts(self) -> dict:
        counts = {}
        for lab in self.labels:
            counts[lab] = counts.get(lab, 0) + 1
        return counts

    def indices_of(self, label: str) -> np.ndarray:
        return np.array([i for i, lab in enumerate(self.labels) if lab == label], dtype=int)

    def binary_labels(self, positive=LABEL_HUMAN) -> np.ndarray:
        """0/1 label array; ``positive`` may be a single class or a tuple."""
        pos = (positive,) if isinstance(positive, str) else tuple(positive)
        return np.array([1 if lab in pos else 0 for lab in self.labels], dtype=int)
