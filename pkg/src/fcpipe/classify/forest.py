"""Random forest of CART trees grown on bootstrap samples with Gini splits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingleClassTraining
from .config import UINT64

TIE_EPS = 1e-12


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Counter-based stream for one tree: Philox keyed by seed + tree index."""
    return np.random.Generator(np.random.Philox(key=(int(seed) + int(tree_index)) % UINT64))


@dataclass(eq=False)
class DecisionTree:
    # node arrays; feature == -1 marks a leaf
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2) class counts
    n_features: int

    def leaf_counts(self, x) -> np.ndarray:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return self.counts[node]

    def vote(self, x) -> int:
        c = self.leaf_counts(x)
        return int(c[1] > c[0])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }


def best_split(x, y, features):
    """Lowest weighted-Gini split over `features` (ascending), thresholds ascending.

    Returns ``(feature, threshold, weighted_gini)`` or None when every
    candidate feature is constant on this node.
    """
    n = len(y)
    best = None
    for f in sorted(int(k) for k in features):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y[order]
        ones_left = np.cumsum(ys)[:-1].astype(float)
        n_left = np.arange(1, n, dtype=float)
        n_right = n - n_left
        ones_right = ys.sum() - ones_left
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            continue
        g_left = 1.0 - (ones_left / n_left) ** 2 - (1.0 - ones_left / n_left) ** 2
        g_right = 1.0 - (ones_right / n_right) ** 2 - (1.0 - ones_right / n_right) ** 2
        weighted = (n_left * g_left + n_right * g_right) / n
        for k in np.flatnonzero(valid):
            score = weighted[k]
            if best is None or score < best[2] - TIE_EPS:
                best = (f, 0.5 * (xs[k] + xs[k + 1]), float(score))
    return best


def grow_tree(x, y, rng, n_candidates: int, max_depth=None) -> DecisionTree:
    n_features = x.shape[1]
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        c1 = int(y[idx].sum())
        counts.append((len(idx) - c1, c1))
        return len(feature) - 1

    def build(idx, depth):
        node = new_node(idx)
        c0, c1 = counts[node]
        if c0 == 0 or c1 == 0 or len(idx) < 2 or (max_depth is not None and depth >= max_depth):
            return node
        cand = rng.choice(n_features, size=n_candidates, replace=False)
        split = best_split(x[idx], y[idx], cand)
        if split is None:
            return node
        f, thr, _ = split
        mask = x[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = build(idx[mask], depth + 1)
        right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(len(y)), 0)
    return DecisionTree(
        np.array(feature, dtype=int),
        np.array(threshold, dtype=float),
        np.array(left, dtype=int),
        np.array(right, dtype=int),
        np.array(counts, dtype=int).reshape(-1, 2),
        n_features,
    )


@dataclass(eq=False)
class ForestModel:
    kind: str
    trees: list
    n_features: int

    def decision(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {x.shape[-1]}")
        rows = np.atleast_2d(x)
        out = np.array([np.mean([t.vote(r) for t in self.trees]) for r in rows])
        return out if x.ndim == 2 else out[0]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }


def candidate_count(features_per_split, n_features: int) -> int:
    if features_per_split == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    return min(int(features_per_split), n_features)


def train_random_forest(x, y, cfg) -> ForestModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if np.unique(y).size < 2:
        raise SingleClassTraining("training labels contain a single class")
    n, p = x.shape
    k = candidate_count(cfg.features_per_split, p)
    trees = []
    for t in range(cfg.trees):
        rng = tree_rng(cfg.rng_seed, t)
        boot = rng.integers(0, n, size=n)
        trees.append(grow_tree(x[boot], y[boot], rng, k, cfg.max_depth))
    return ForestModel("random_forest", trees, p)
