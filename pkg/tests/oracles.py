"""Independent brute-force references used by the test-suite.

Nothing here imports fcpipe: distances come from Floyd-Warshall, betweenness
from exhaustive enumeration of simple paths, regressions from the normal
equations, gradients from central differences.
"""

import itertools
import math

import numpy as np

INF = math.inf


def floyd_warshall(adj):
    n = len(adj)
    d = [[0 if i == j else (1 if adj[i][j] else INF) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def all_shortest_paths(adj, s, t):
    """Every minimum-length simple s-t path, by exhaustive DFS over simple paths."""
    n = len(adj)
    paths = []

    def dfs(path, seen):
        v = path[-1]
        if v == t:
            paths.append(list(path))
            return
        for w in range(n):
            if adj[v][w] and w not in seen:
                seen.add(w)
                path.append(w)
                dfs(path, seen)
                path.pop()
                seen.remove(w)

    dfs([s], {s})
    if not paths:
        return []
    best = min(len(p) for p in paths)
    return [p for p in paths if len(p) == best]


def betweenness(adj):
    n = len(adj)
    raw = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        paths = all_shortest_paths(adj, s, t)
        if not paths:
            continue
        for v in range(n):
            if v in (s, t):
                continue
            raw[v] += sum(v in p for p in paths) / len(paths)
    if n < 3:
        return [0.0] * n
    return [b * 2.0 / ((n - 1) * (n - 2)) for b in raw]


def clustering(adj):
    n = len(adj)
    out = []
    for v in range(n):
        nb = [u for u in range(n) if adj[v][u]]
        k = len(nb)
        if k < 2:
            out.append(0.0)
            continue
        links = sum(1 for a, b in itertools.combinations(nb, 2) if adj[a][b])
        out.append(links / (k * (k - 1) / 2))
    return out


def degree_centrality(adj):
    n = len(adj)
    return [sum(bool(x) for x in adj[v]) / (n - 1) for v in range(n)]


def closeness(adj):
    n = len(adj)
    d = floyd_warshall(adj)
    out = []
    for v in range(n):
        reach = [d[v][u] for u in range(n) if u != v and d[v][u] < INF]
        m = len(reach)
        out.append(0.0 if m == 0 else (m / sum(reach)) * (m / (n - 1)))
    return out


def avg_neighbor_degree(adj):
    n = len(adj)
    deg = [sum(bool(x) for x in adj[v]) for v in range(n)]
    out = []
    for v in range(n):
        nb = [u for u in range(n) if adj[v][u]]
        out.append(sum(deg[u] for u in nb) / len(nb) if nb else 0.0)
    return out


def global_efficiency(adj):
    n = len(adj)
    if n < 2:
        return 0.0
    d = floyd_warshall(adj)
    total = sum(1.0 / d[i][j] for i in range(n) for j in range(n) if i != j and d[i][j] < INF)
    return total / (n * (n - 1))


def local_efficiency(adj):
    n = len(adj)
    if n == 0:
        return 0.0
    total = 0.0
    for v in range(n):
        nb = [u for u in range(n) if adj[v][u]]
        sub = [[adj[a][b] for b in nb] for a in nb]
        total += global_efficiency(sub)
    return total / n


def all_metrics(adj):
    return {
        "clustering": clustering(adj),
        "degree_centrality": degree_centrality(adj),
        "closeness": closeness(adj),
        "betweenness": betweenness(adj),
        "avg_neighbor_degree": avg_neighbor_degree(adj),
        "local_efficiency": local_efficiency(adj),
        "global_efficiency": global_efficiency(adj),
    }


def ols_residuals(y, regressors):
    """Residuals of y on [1 | regressors] via the normal equations."""
    t = len(y)
    design = np.column_stack([np.ones(t), np.asarray(regressors, dtype=float).reshape(t, -1)])
    coef = np.linalg.solve(design.T @ design, design.T @ np.asarray(y, dtype=float))
    return np.asarray(y, dtype=float) - design @ coef


def central_difference(f, theta, h=1e-5):
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        grad[k] = (f(theta + e) - f(theta - e)) / (2 * h)
    return grad


def pearson(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / math.sqrt(vx * vy)


def random_adjacency(rng, n, p=None):
    if p is None:
        p = rng.uniform(0.1, 0.9)
    a = np.zeros((n, n), dtype=bool)
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            a[i, j] = a[j, i] = True
    return a


def all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        a = np.zeros((n, n), dtype=bool)
        for k, (i, j) in enumerate(pairs):
            if mask >> k & 1:
                a[i, j] = a[j, i] = True
        yield a
