"""Loading and validation of ROI time-series files and dataset manifests.

Time-series files are comma-separated text: a header row of region labels,
then one row per volume. Manifests list ``subject_id,label,path`` per line,
with ``#`` comments and optional ``key=value`` directives (``tr=2.0``,
``label0=...``, ``label1=...``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ClassUnderpopulated,
    ConfigError,
    DuplicateRegionLabel,
    DuplicateSubject,
    MissingFile,
    NonNumericCell,
    RaggedRows,
    RegionMismatch,
    TooFewRows,
    TrMismatch,
    UnknownLabel,
)

DEFAULT_TR = 2.0


@dataclass(frozen=True, eq=False)
class RoiTimeSeries:
    """One subject's T x R matrix of BOLD samples.

    Column ``j`` of ``data`` belongs to ``region_labels[j]``.
    """

    subject_id: str
    region_labels: tuple[str, ...]
    data: np.ndarray
    tr_seconds: float = DEFAULT_TR

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "region_labels", tuple(self.region_labels))
        if data.ndim != 2:
            raise ValueError("time-series data must be a T x R matrix")
        if data.shape[0] < 2:
            raise TooFewRows(f"{self.subject_id}: need at least 2 timepoints, got {data.shape[0]}")
        if data.shape[1] < 2:
            raise ValueError(f"{self.subject_id}: need at least 2 regions, got {data.shape[1]}")
        if len(self.region_labels) != data.shape[1]:
            raise RaggedRows(
                f"{self.subject_id}: {len(self.region_labels)} labels for {data.shape[1]} columns"
            )
        if len(set(self.region_labels)) != len(self.region_labels):
            raise DuplicateRegionLabel(f"{self.subject_id}: region labels are not unique")
        if not np.all(np.isfinite(data)):
            raise NonNumericCell(f"{self.subject_id}: non-finite sample in time series")
        if not (self.tr_seconds > 0 and math.isfinite(self.tr_seconds)):
            raise ValueError("tr_seconds must be positive")

    @property
    def n_timepoints(self) -> int:
        return self.data.shape[0]

    @property
    def n_regions(self) -> int:
        return self.data.shape[1]

    def with_data(self, data) -> "RoiTimeSeries":
        return RoiTimeSeries(self.subject_id, self.region_labels, data, self.tr_seconds)


@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    label: int
    path: Path


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    label_names: dict = field(default_factory=lambda: {0: "group0", 1: "group1"})
    tr_seconds: float = DEFAULT_TR

    @property
    def subject_ids(self) -> list[str]:
        return [e.subject_id for e in self.entries]

    @property
    def labels(self) -> list[int]:
        return [e.label for e in self.entries]


@dataclass(frozen=True)
class CohortSummary:
    n_regions: int
    t_min: int
    t_max: int
    n_subjects: int


def _split_line(line: str) -> list[str]:
    return [cell.strip() for cell in line.split(",")]


def load_time_series(path, tr_seconds: float = DEFAULT_TR, subject_id: str | None = None) -> RoiTimeSeries:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"time-series file not found: {path}")
    # newline=None accepts both LF and CRLF
    with open(path, encoding="utf-8", newline=None) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise TooFewRows(f"{path}: empty file")

    labels = _split_line(lines[0])
    if len(set(labels)) != len(labels):
        raise DuplicateRegionLabel(f"{path}: duplicate region label in header")

    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = _split_line(line)
        if len(cells) != len(labels):
            raise RaggedRows(f"{path}:{lineno}: expected {len(labels)} columns, got {len(cells)}")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise NonNumericCell(f"{path}:{lineno}: non-numeric cell") from None
        if not all(math.isfinite(v) for v in row):
            raise NonNumericCell(f"{path}:{lineno}: non-finite value")
        rows.append(row)
    if len(rows) < 2:
        raise TooFewRows(f"{path}: need at least 2 data rows, got {len(rows)}")

    return RoiTimeSeries(
        subject_id=subject_id if subject_id is not None else path.stem,
        region_labels=labels,
        data=np.array(rows, dtype=float),
        tr_seconds=tr_seconds,
    )


def write_time_series(ts: RoiTimeSeries, path) -> None:
    """Write ``ts`` in the format read by :func:`load_time_series` (lossless)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(ts.region_labels) + "\n")
        for row in ts.data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    base = path.parent
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    tr = DEFAULT_TR
    label_names = {0: "group0", 1: "group1"}

    with open(path, encoding="utf-8", newline=None) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line and "," not in line:
                key, _, value = (s.strip() for s in line.partition("="))
                if key == "tr":
                    try:
                        tr = float(value)
                    except ValueError:
                        raise ConfigError(f"{path}:{lineno}: bad tr value {value!r}") from None
                    if not (tr > 0 and math.isfinite(tr)):
                        raise ConfigError(f"{path}:{lineno}: tr must be positive")
                elif key in ("label0", "label1"):
                    label_names[int(key[-1])] = value
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown directive {key!r}")
                continue
            cells = _split_line(line)
            if len(cells) != 3:
                raise ConfigError(f"{path}:{lineno}: expected subject_id,label,path")
            sid, label, rel = cells
            if label not in ("0", "1"):
                raise UnknownLabel(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
            if sid in seen:
                raise DuplicateSubject(f"{path}:{lineno}: duplicate subject {sid!r}")
            seen.add(sid)
            entries.append(ManifestEntry(sid, int(label), (base / rel)))

    counts = [sum(e.label == k for e in entries) for k in (0, 1)]
    if min(counts) < 2:
        raise ClassUnderpopulated(
            f"{path}: each class needs at least 2 subjects (have {counts[0]} x 0, {counts[1]} x 1)"
        )
    return DatasetManifest(tuple(entries), label_names, tr)


def write_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"tr={manifest.tr_seconds!r}\n")
        fh.write(f"label0={manifest.label_names[0]}\n")
        fh.write(f"label1={manifest.label_names[1]}\n")
        for e in manifest.entries:
            rel = Path(e.path)
            try:
                rel = rel.relative_to(path.parent)
            except ValueError:
                pass
            fh.write(f"{e.subject_id},{e.label},{rel.as_posix()}\n")


def load_subject(entry: ManifestEntry, tr_seconds: float) -> RoiTimeSeries:
    return load_time_series(entry.path, tr_seconds=tr_seconds, subject_id=entry.subject_id)


def check_cohort(series) -> CohortSummary:
    """Verify that all subjects share region labels (in order) and TR."""
    series = list(series)
    if not series:
        raise ValueError("empty cohort")
    ref = series[0]
    for ts in series[1:]:
        if ts.region_labels != ref.region_labels:
            raise RegionMismatch(
                f"subject {ts.subject_id!r} region labels differ from {ref.subject_id!r}"
            )
        if ts.tr_seconds != ref.tr_seconds:
            raise TrMismatch(
                f"subject {ts.subject_id!r} has tr={ts.tr_seconds}, expected {ref.tr_seconds}"
            )
    lengths = [ts.n_timepoints for ts in series]
    return CohortSummary(ref.n_regions, min(lengths), max(lengths), len(series))
