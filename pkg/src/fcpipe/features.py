"""Per-subject graph feature vectors and the labelled dataset built from them.

Feature order is metric-major, region-minor: all clustering values, then
degree centrality, closeness, betweenness and average neighbour degree, each
over regions in their original order, followed by local and global
efficiency. For R regions this gives 5R + 2 features.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ClassUnderpopulated,
    FeatureNameMismatch,
    LengthMismatch,
    MissingSubjectVector,
    NonNumericCell,
)
from .graphmetrics import NODE_METRICS, GraphMetricPair, NodeMetricTable

GLOBAL_FEATURES = ("local_efficiency", "global_efficiency")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.names) != len(self.values):
            raise LengthMismatch("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise FeatureNameMismatch("feature names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    def __len__(self):
        return len(self.names)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    subject_ids: tuple[str, ...]
    labels: np.ndarray
    feature_names: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        n = len(self.subject_ids)
        if self.matrix.shape != (n, len(self.feature_names)) or self.labels.shape != (n,):
            raise LengthMismatch("dataset dimensions are inconsistent")
        if not set(np.unique(self.labels)) <= {0, 1}:
            raise ValueError("labels must be 0 or 1")

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)


def feature_names(region_labels) -> tuple[str, ...]:
    names = [f"{metric}__{lab}" for metric in NODE_METRICS for lab in region_labels]
    return tuple(names) + GLOBAL_FEATURES


def build_feature_vector(node: NodeMetricTable, pair: GraphMetricPair) -> FeatureVector:
    r = len(node.region_labels)
    cols = [np.asarray(node.column(m), dtype=float) for m in NODE_METRICS]
    if any(c.shape != (r,) for c in cols):
        raise LengthMismatch(f"node metric columns must all have length {r}")
    values = np.concatenate(cols + [np.array([pair.local_efficiency, pair.global_efficiency])])
    return FeatureVector(feature_names(node.region_labels), values)


def assemble_dataset(manifest, vectors: dict) -> LabeledDataset:
    rows, names = [], None
    for entry in manifest.entries:
        vec = vectors.get(entry.subject_id)
        if vec is None:
            raise MissingSubjectVector(entry.subject_id)
        if names is None:
            names = vec.names
        elif vec.names != names:
            raise FeatureNameMismatch(
                f"subject {entry.subject_id!r} feature names differ from the first subject"
            )
        rows.append(vec.values)
    return LabeledDataset(
        subject_ids=[e.subject_id for e in manifest.entries],
        labels=[e.label for e in manifest.entries],
        feature_names=names or (),
        matrix=np.vstack(rows) if rows else np.zeros((0, 0)),
    )


def write_dataset(ds: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject_id", "label", *ds.feature_names])
        for sid, label, row in zip(ds.subject_ids, ds.labels, ds.matrix):
            writer.writerow([sid, int(label), *(repr(float(v)) for v in row)])


def read_dataset(path) -> LabeledDataset:
    with open(Path(path), encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["subject_id", "label"]:
            raise ValueError(f"{path}: header must start with subject_id,label")
        sids, labels, rows = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise LengthMismatch(f"{path}:{lineno}: expected {len(header)} columns")
            sids.append(rec[0])
            labels.append(int(rec[1]))
            try:
                row = [float(v) for v in rec[2:]]
            except ValueError:
                raise NonNumericCell(f"{path}:{lineno}: non-numeric feature value") from None
            if not all(math.isfinite(v) for v in row):
                raise NonNumericCell(f"{path}:{lineno}: non-finite feature value")
            rows.append(row)
    return LabeledDataset(sids, labels, header[2:], np.array(rows).reshape(len(rows), len(header) - 2))


def check_loocv_ready(ds: LabeledDataset) -> None:
    counts = [int(np.sum(ds.labels == k)) for k in (0, 1)]
    if ds.n_subjects < 4 or min(counts) < 2:
        raise ClassUnderpopulated(
            f"leave-one-out needs >= 4 subjects and >= 2 per class; have {counts[0]} x 0, {counts[1]} x 1"
        )
