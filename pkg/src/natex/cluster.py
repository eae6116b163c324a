"""Agglomerative Ward clustering of the 2-D embedding.

The dendrogram is built once per embedding with a nearest-neighbor-chain
agglomeration (Ward distances computed from cluster centroids, so no
distance matrix is materialized). Cutting to any k afterwards only walks
the stored merge list: linear time, no coordinate access.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class Dendrogram:
    """Full merge history. Leaves are 0..n-1; merge i creates node n+i.

    ``merges`` rows are (node_a, node_b, height) with node_a < node_b and
    heights non-decreasing.
    """

    n_leaves: int
    merges: np.ndarray  # (n_leaves - 1, 3)

    def __post_init__(self):
        assert self.merges.shape == (self.n_leaves - 1, 3)

    def leaf_order(self):
        """Left-to-right leaf positions from a depth-first walk of the tree."""
        n = self.n_leaves
        order = []
        stack = [2 * n - 2]
        while stack:
            node = stack.pop()
            if node < n:
                order.append(node)
            else:
                a, b = self.merges[node - n, :2]
                stack.append(int(b))
                stack.append(int(a))
        return order


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: np.ndarray  # per-row cluster id in 0..k-1
    sizes: tuple  # per-cluster member counts

    def members(self, cluster_id):
        return np.flatnonzero(self.labels == cluster_id)


@njit(cache=True)
def _nn_chain(px, py):
    n = px.shape[0]
    cx = px.copy()
    cy = py.copy()
    sz = np.ones(n)
    active = np.ones(n, dtype=np.bool_)
    node = np.arange(n)
    merges = np.empty((n - 1, 3))
    chain = np.empty(n, dtype=np.int64)
    clen = 0
    next_id = n
    n_merged = 0
    seed = 0
    while n_merged < n - 1:
        if clen == 0:
            while not active[seed]:
                seed += 1
            chain[0] = seed
            clen = 1
        while True:
            a = chain[clen - 1]
            best = -1
            bestd = np.inf
            for j in range(n):
                if not active[j] or j == a:
                    continue
                dx = cx[a] - cx[j]
                dy = cy[a] - cy[j]
                d = (2.0 * sz[a] * sz[j] / (sz[a] + sz[j])) * (dx * dx + dy * dy)
                if d < bestd:
                    bestd = d
                    best = j
            if clen > 1 and best == chain[clen - 2]:
                b = best
                na, nb = node[a], node[b]
                merges[n_merged, 0] = min(na, nb)
                merges[n_merged, 1] = max(na, nb)
                merges[n_merged, 2] = np.sqrt(bestd)
                s = sz[a] + sz[b]
                cx[a] = (sz[a] * cx[a] + sz[b] * cx[b]) / s
                cy[a] = (sz[a] * cy[a] + sz[b] * cy[b]) / s
                sz[a] = s
                node[a] = next_id
                next_id += 1
                active[b] = False
                n_merged += 1
                clen -= 2
                break
            chain[clen] = best
            clen += 1
    return merges


def _sort_and_relabel(raw, n):
    # order merges by height; remap internal node ids to creation order
    order = np.argsort(raw[:, 2], kind="stable")
    old2new = np.arange(2 * n - 1)
    old2new[n + order] = n + np.arange(n - 1)
    out = np.empty_like(raw)
    a = old2new[raw[order, 0].astype(np.int64)]
    b = old2new[raw[order, 1].astype(np.int64)]
    out[:, 0] = np.minimum(a, b)
    out[:, 1] = np.maximum(a, b)
    out[:, 2] = raw[order, 2]
    return out


def build_dendrogram(emb):
    """Ward-linkage merge history for an Embedding2D (or an (n, 2) array)."""
    coords = np.asarray(getattr(emb, "coords", emb), dtype=float)
    n = coords.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points to cluster")
    raw = _nn_chain(
        np.ascontiguousarray(coords[:, 0]), np.ascontiguousarray(coords[:, 1])
    )
    return Dendrogram(n, _sort_and_relabel(raw, n))


def cut(dendrogram, k):
    """Partition into k clusters by dropping the top k-1 merges.

    Runs in time linear in n; never looks at coordinates. Labels are
    canonical: clusters numbered by their smallest member row position.
    """
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    parent = np.arange(2 * n - 1)
    merges = dendrogram.merges
    for i in range(n - k):
        a, b = int(merges[i, 0]), int(merges[i, 1])
        parent[a] = parent[b] = n + i
    labels = np.empty(n, dtype=np.int64)
    root_label = {}
    for i in range(n):
        r = i
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        if r not in root_label:
            root_label[r] = len(root_label)
        labels[i] = root_label[r]
    sizes = np.bincount(labels, minlength=k)
    return ClusterAssignment(k, labels, tuple(int(s) for s in sizes))


def naive_ward(coords):
    """Reference O(n^3) Ward agglomeration over a full dissimilarity matrix.

    Tie-broken by the lexicographically smallest (min id, max id) pair.
    Independent of build_dendrogram; used as the test oracle.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    cent = np.zeros((2 * n - 1, 2))
    cent[:n] = coords
    sz = np.zeros(2 * n - 1)
    sz[:n] = 1.0
    ids = list(range(n))
    merges = np.empty((n - 1, 3))
    for step in range(n - 1):
        m = len(ids)
        c = cent[ids]
        s = sz[ids]
        d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(-1)
        w = 2.0 * s[:, None] * s[None, :] / (s[:, None] + s[None, :])
        cost = w * d2
        cost[np.tril_indices(m)] = np.inf
        # argmin scans row-major: first hit is the lex-smallest (i, j) pair
        flat = int(np.argmin(cost))
        i, j = divmod(flat, m)
        a, b = ids[i], ids[j]
        new = n + step
        merges[step] = (min(a, b), max(a, b), np.sqrt(cost[i, j]))
        sz[new] = sz[a] + sz[b]
        cent[new] = (sz[a] * cent[a] + sz[b] * cent[b]) / sz[new]
        ids = [x for x in ids if x not in (a, b)] + [new]
    return Dendrogram(n, _sort_and_relabel(merges, n))


def covariate_profile(ds, assignment, cluster_id, columns, row_ids, mask=None):
    """Per-column summary stats over a cluster's non-excluded member rows.

    Returns {column: {min, q1, median, q3, max, mean, hist}} where hist has
    10 equal-width bins, or {column: None} when no usable rows remain.
    """
    if not 0 <= cluster_id < assignment.k:
        raise ValueError(f"no such cluster: {cluster_id}")
    pos = {rid: i for i, rid in enumerate(ds.row_ids)}
    members = [
        rid
        for rid, lab in zip(row_ids, assignment.labels)
        if lab == cluster_id and (mask is None or rid not in mask)
    ]
    out = {}
    for name in columns:
        col = ds.values[ds.column(name).name]
        vals = np.array(
            [col[pos[r]] for r in members if col[pos[r]] is not None], dtype=float
        )
        if vals.size == 0:
            out[name] = None
            continue
        lo, hi = float(vals.min()), float(vals.max())
        hist = np.histogram(vals, bins=10, range=(lo, hi) if hi > lo else (lo - 0.5, lo + 0.5))[0]
        q1, med, q3 = np.percentile(vals, [25, 50, 75])
        out[name] = {
            "min": lo,
            "q1": float(q1),
            "median": float(med),
            "q3": float(q3),
            "max": hi,
            "mean": float(vals.mean()),
            "hist": [int(h) for h in hist],
        }
    return out


def dumps_dendrogram(d):
    """Serialize: "n <n_leaves>" then one "a b height" line per merge."""
    lines = [f"n {d.n_leaves}"]
    for a, b, h in d.merges:
        lines.append(f"{int(a)} {int(b)} {float(h)!r}")
    return "\n".join(lines) + "\n"


def loads_dendrogram(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n "):
        raise ValueError("bad dendrogram header")
    n = int(lines[0].split()[1])
    merges = np.empty((n - 1, 3))
    for i, ln in enumerate(lines[1:]):
        a, b, h = ln.split()
        merges[i] = (int(a), int(b), float(h))
    return Dendrogram(n, merges)
