"""Pearson functional connectivity and binarisation into simple graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DensityOutOfRange,
    RaggedRows,
    TauOutOfRange,
    ZeroVarianceRegion,
)
from .ingest import RoiTimeSeries

MIN_STD = 1e-12


@dataclass(frozen=True, eq=False)
class ConnectivityMatrix:
    region_labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "region_labels", tuple(self.region_labels))
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.region_labels):
            raise ValueError("connectivity matrix must be R x R with R labels")

    @property
    def n_regions(self) -> int:
        return len(self.region_labels)


@dataclass(frozen=True, eq=False)
class BinaryGraph:
    region_labels: tuple[str, ...]
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=bool)
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "region_labels", tuple(self.region_labels))
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != len(self.region_labels):
            raise ValueError("adjacency must be R x R with R labels")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if a.diagonal().any():
            raise ValueError("self-loops are not allowed")

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def density(self) -> float:
        n = self.n_nodes
        return self.n_edges / (n * (n - 1) / 2) if n > 1 else 0.0

    @classmethod
    def from_edges(cls, labels, edges) -> "BinaryGraph":
        labels = tuple(labels)
        idx = {lab: k for k, lab in enumerate(labels)}
        a = np.zeros((len(labels), len(labels)), dtype=bool)
        for u, v in edges:
            i = idx[u] if u in idx else u
            j = idx[v] if v in idx else v
            a[i, j] = a[j, i] = True
        return cls(labels, a)


def pearson_matrix(ts: RoiTimeSeries) -> ConnectivityMatrix:
    x = ts.data
    centered = x - x.mean(axis=0)
    std = np.sqrt((centered**2).sum(axis=0) / (x.shape[0] - 1))
    bad = np.flatnonzero(std <= MIN_STD)
    if bad.size:
        raise ZeroVarianceRegion(ts.region_labels[bad[0]], ts.subject_id)
    z = centered / std
    r = (z.T @ z) / (x.shape[0] - 1)
    r = 0.5 * (r + r.T)
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return ConnectivityMatrix(ts.region_labels, r)


def threshold_graph(cm: ConnectivityMatrix, tau: float) -> BinaryGraph:
    """Edge (i, j) iff ``values[i, j] > tau``; the diagonal never contributes."""
    if not (-1.0 < tau < 1.0):
        raise TauOutOfRange(f"tau must lie in (-1, 1), got {tau}")
    adj = cm.values > tau
    np.fill_diagonal(adj, False)
    # symmetric input gives a symmetric mask; enforce it against round-off anyway
    adj = adj & adj.T
    return BinaryGraph(cm.region_labels, adj)


def density_threshold(cm: ConnectivityMatrix, density: float) -> BinaryGraph:
    """Keep the ceil(density * R(R-1)/2) strongest upper-triangle entries.

    Ties at the cut are resolved in favour of the lexicographically smaller
    (i, j) index pair.
    """
    if not (0.0 < density <= 1.0):
        raise DensityOutOfRange(f"density must lie in (0, 1], got {density}")
    r = cm.n_regions
    iu, ju = np.triu_indices(r, k=1)
    vals = cm.values[iu, ju]
    n_keep = max(1, math.ceil(density * len(vals) - 1e-12))
    # primary key: value descending; then i ascending, j ascending
    order = np.lexsort((ju, iu, -vals))[:n_keep]
    adj = np.zeros((r, r), dtype=bool)
    adj[iu[order], ju[order]] = True
    adj |= adj.T
    return BinaryGraph(cm.region_labels, adj)


def write_matrix(labels, values, path, fmt=repr) -> None:
    """Square matrix with header row and header column of region labels."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("," + ",".join(labels) + "\n")
        for lab, row in zip(labels, values):
            fh.write(lab + "," + ",".join(fmt(v) for v in row) + "\n")


def read_matrix(path):
    with open(Path(path), encoding="utf-8", newline=None) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    labels = lines[0].split(",")[1:]
    rows, row_labels = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(labels) + 1:
            raise RaggedRows(f"{path}: row {cells[0]!r} has wrong length")
        row_labels.append(cells[0])
        rows.append([float(c) for c in cells[1:]])
    if row_labels != labels:
        raise ValueError(f"{path}: row labels do not match column labels")
    return labels, np.array(rows)


def write_connectivity(cm: ConnectivityMatrix, path) -> None:
    write_matrix(cm.region_labels, cm.values, path, fmt=lambda v: repr(float(v)))


def read_connectivity(path) -> ConnectivityMatrix:
    labels, vals = read_matrix(path)
    return ConnectivityMatrix(labels, vals)


def write_graph(g: BinaryGraph, path) -> None:
    write_matrix(g.region_labels, g.adjacency, path, fmt=lambda v: "1" if v else "0")


def read_graph(path) -> BinaryGraph:
    labels, vals = read_matrix(path)
    return BinaryGraph(labels, vals != 0)
