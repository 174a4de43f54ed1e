"""Node-level and whole-graph metrics on unweighted, undirected simple graphs.

Distances are hop counts from breadth-first search; unreachable pairs have
infinite distance and contribute ``1/inf = 0`` to efficiencies. Normalisations
follow the common conventions of networkx (component-scaled closeness,
betweenness divided by ``(n-1)(n-2)/2``) so feature values are comparable
with analyses built on that library.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .connectivity import BinaryGraph

NODE_METRICS = (
    "clustering",
    "degree_centrality",
    "closeness",
    "betweenness",
    "avg_neighbor_degree",
)


@dataclass(frozen=True, eq=False)
class NodeMetricTable:
    region_labels: tuple[str, ...]
    clustering: np.ndarray
    degree_centrality: np.ndarray
    closeness: np.ndarray
    betweenness: np.ndarray
    avg_neighbor_degree: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)


@dataclass(frozen=True)
class GraphMetricPair:
    local_efficiency: float
    global_efficiency: float


def _adj(g) -> np.ndarray:
    return g.adjacency if isinstance(g, BinaryGraph) else np.asarray(g, dtype=bool)


def hop_distances(adjacency) -> np.ndarray:
    """All-pairs hop distances by level-synchronous BFS from every source at once.

    Returns a float matrix with ``inf`` for unreachable pairs and 0 on the diagonal.
    """
    a = np.asarray(adjacency, dtype=bool)
    n = a.shape[0]
    dist = np.full((n, n), np.inf)
    if n == 0:
        return dist
    np.fill_diagonal(dist, 0.0)
    reached = np.eye(n, dtype=bool)
    frontier = reached.copy()
    af = a.astype(np.float64)
    level = 0
    while True:
        level += 1
        nxt = ((frontier.astype(np.float64) @ af) > 0) & ~reached
        if not nxt.any():
            break
        dist[nxt] = level
        reached |= nxt
        frontier = nxt
    return dist


def _inverse_distance_sum(dist: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        inv = 1.0 / dist
    np.fill_diagonal(inv, 0.0)
    return float(inv.sum())


def clustering_coefficient(g) -> np.ndarray:
    a = _adj(g).astype(np.float64)
    deg = a.sum(axis=1)
    # links among neighbours of v: half the number of closed 2-walks v-u-w-v
    links = ((a @ a) * a).sum(axis=1) / 2.0
    denom = deg * (deg - 1)
    out = np.zeros_like(deg)
    ok = deg >= 2
    out[ok] = 2.0 * links[ok] / denom[ok]
    return out


def degree_centrality(g) -> np.ndarray:
    a = _adj(g)
    n = a.shape[0]
    if n < 2:
        return np.zeros(n)
    return a.sum(axis=1) / (n - 1)


def closeness_centrality(g, dist: np.ndarray | None = None) -> np.ndarray:
    a = _adj(g)
    n = a.shape[0]
    if dist is None:
        dist = hop_distances(a)
    out = np.zeros(n)
    if n < 2:
        return out
    for v in range(n):
        row = dist[v]
        reach = np.isfinite(row)
        reach[v] = False
        m = int(reach.sum())
        if m == 0:
            continue
        total = row[reach].sum()
        out[v] = (m / total) * (m / (n - 1))
    return out


def _brandes_raw(a: np.ndarray) -> np.ndarray:
    """Unnormalised betweenness over unordered pairs (Brandes accumulation)."""
    n = a.shape[0]
    nbrs = [np.flatnonzero(a[v]).tolist() for v in range(n)]
    cb = [0.0] * n
    for s in range(n):
        order = []
        preds = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v] + 1
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    # every unordered pair was visited from both endpoints
    return np.array(cb) / 2.0


def betweenness_centrality(g) -> np.ndarray:
    a = _adj(g)
    n = a.shape[0]
    if n < 3:
        return np.zeros(n)
    return _brandes_raw(a) * (2.0 / ((n - 1) * (n - 2)))


def average_neighbor_degree(g) -> np.ndarray:
    a = _adj(g).astype(np.float64)
    deg = a.sum(axis=1)
    out = np.zeros_like(deg)
    ok = deg > 0
    out[ok] = (a @ deg)[ok] / deg[ok]
    return out


def global_efficiency(g, dist: np.ndarray | None = None) -> float:
    a = _adj(g)
    n = a.shape[0]
    if n < 2:
        return 0.0
    if dist is None:
        dist = hop_distances(a)
    return _inverse_distance_sum(dist) / (n * (n - 1))


def local_efficiency(g) -> float:
    a = _adj(g)
    n = a.shape[0]
    if n == 0:
        return 0.0
    total = 0.0
    for v in range(n):
        nb = np.flatnonzero(a[v])
        if nb.size < 2:
            continue
        total += global_efficiency(a[np.ix_(nb, nb)])
    return total / n


def node_metrics(g: BinaryGraph) -> NodeMetricTable:
    dist = hop_distances(g.adjacency)
    return NodeMetricTable(
        region_labels=g.region_labels,
        clustering=clustering_coefficient(g),
        degree_centrality=degree_centrality(g),
        closeness=closeness_centrality(g, dist),
        betweenness=betweenness_centrality(g),
        avg_neighbor_degree=average_neighbor_degree(g),
    )


def graph_metrics(g: BinaryGraph) -> GraphMetricPair:
    return GraphMetricPair(
        local_efficiency=local_efficiency(g),
        global_efficiency=global_efficiency(g),
    )
