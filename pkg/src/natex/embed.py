"""2-D embedding of each row's confounder profile.

Two methods share one contract (deterministic given features, seed, and
method):

* ``neighbor-graph`` — k-nearest-neighbor graph with fuzzy membership
  weights, laid out by stochastic attraction/repulsion (negative
  sampling), in the style of manifold layout methods. Initialized from
  the principal-axes projection so runs are reproducible bit-for-bit.
* ``pca`` — plain projection onto the top two principal axes; fully
  deterministic and the method of choice for exact oracle tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from .data import active_rows

N_NEIGHBORS = 15
N_EPOCHS = 200
MIN_DIST = 0.1
NEGATIVE_SAMPLES = 5
# force-curve coefficients fitted for MIN_DIST = 0.1
_CURVE_A = 1.577
_CURVE_B = 0.8951

METHODS = ("neighbor-graph", "pca")


class EmbedError(Exception):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    row_ids: tuple
    features: np.ndarray  # (n_rows, n_features), z-scored
    feature_names: tuple


@dataclass(frozen=True)
class Embedding2D:
    row_ids: tuple
    coords: np.ndarray  # (n_rows, 2)
    seed: int
    method: str
    fallback: bool = False  # neighbor-graph requested but too few rows


def build_features(ds, treatment, outcome):
    """Feature matrix for one analysis pair.

    Features are every analysis column except the selected treatment and
    all outcome-role columns; rows must be complete in the features plus
    the pair itself. Constant columns are dropped after the row filter.
    """
    if treatment == outcome:
        raise EmbedError("treatment and outcome must differ")
    analysis = set(ds.treatments) | set(ds.outcomes) | set(ds.covariates)
    for name in (treatment, outcome):
        if name not in analysis:
            raise EmbedError(f"column {name!r} has no analysis role")
    feature_names = [
        c.name
        for c in ds.columns
        if c.name in analysis and c.name != treatment and c.name not in ds.outcomes
    ]
    needed = feature_names + [treatment, outcome]
    rows = active_rows(ds, frozenset(), needed)
    if len(rows) < 10:
        raise EmbedError(f"only {len(rows)} usable rows; need at least 10")
    pos = {rid: i for i, rid in enumerate(ds.row_ids)}
    X = np.array(
        [[ds.values[n][pos[r]] for n in feature_names] for r in rows], dtype=float
    )
    sd = X.std(axis=0)
    keep = sd > 0
    if int(keep.sum()) < 2:
        raise EmbedError("fewer than 2 non-constant feature columns")
    X = (X[:, keep] - X[:, keep].mean(axis=0)) / sd[keep]
    names = tuple(n for n, k in zip(feature_names, keep) if k)
    return FeatureMatrix(tuple(rows), X, names)


def _pca_coords(X):
    Xc = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    # sign convention: largest-magnitude loading positive
    for i in range(min(2, vt.shape[0])):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
    coords = Xc @ vt[:2].T
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(len(coords))])
    return coords


def _smooth_knn_weights(dists, target):
    # per-row bandwidth so that sum of memberships matches log2(k + 1)
    n = dists.shape[0]
    rho = np.array([row[row > 0][0] if (row > 0).any() else 0.0 for row in dists])
    sigma = np.empty(n)
    for i in range(n):
        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(64):
            val = np.exp(-np.maximum(dists[i] - rho[i], 0.0) / mid).sum()
            if abs(val - target) < 1e-5:
                break
            if val > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid
    return np.exp(-np.maximum(dists - rho[:, None], 0.0) / sigma[:, None])


def _neighbor_graph_coords(X, seed):
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    k = min(N_NEIGHBORS, n - 1)
    dists, idx = cKDTree(X).query(X, k=k + 1)
    dists, idx = dists[:, 1:], idx[:, 1:]
    w = _smooth_knn_weights(dists, np.log2(k + 1))
    rows = np.repeat(np.arange(n), k)
    W = coo_matrix((w.ravel(), (rows, idx.ravel())), shape=(n, n)).tocsr()
    W = W + W.T - W.multiply(W.T)  # fuzzy union
    W = W.tocoo()
    upper = W.row < W.col
    ei, ej, ew = W.row[upper], W.col[upper], W.data[upper]

    Y = _pca_coords(X)
    Y = Y / max(np.abs(Y).max(), 1e-12) * 10.0
    a, b = _CURVE_A, _CURVE_B
    p_edge = ew / ew.max()
    for epoch in range(N_EPOCHS):
        alpha = 1.0 - epoch / N_EPOCHS
        m = rng.random(ei.size) < p_edge
        ii, jj = ei[m], ej[m]
        dy = Y[ii] - Y[jj]
        d2 = np.maximum((dy * dy).sum(axis=1), 1e-12)
        grad = (-2.0 * a * b * d2 ** (b - 1.0)) / (1.0 + a * d2**b)
        g = np.clip(grad[:, None] * dy, -4.0, 4.0)
        upd = np.zeros_like(Y)
        np.add.at(upd, ii, alpha * g)
        np.add.at(upd, jj, -alpha * g)
        for _ in range(NEGATIVE_SAMPLES):
            kk = rng.integers(0, n, ii.size)
            dy = Y[ii] - Y[kk]
            d2 = (dy * dy).sum(axis=1)
            grad = (2.0 * b) / ((0.001 + d2) * (1.0 + a * d2**b))
            grad[kk == ii] = 0.0
            g = np.clip(grad[:, None] * dy, -4.0, 4.0)
            np.add.at(upd, ii, alpha * g)
        Y = Y + upd
    return Y


def embed_2d(fm, seed=42, method="neighbor-graph"):
    """Embed a FeatureMatrix into 2-D. Pure function of (fm, seed, method).

    Falls back to pca (flagged, not raised) when the neighbor graph cannot
    be built because n < k + 1.
    """
    if method not in METHODS:
        raise EmbedError(f"unknown method {method!r}")
    n = len(fm.row_ids)
    fallback = False
    if method == "neighbor-graph" and n < N_NEIGHBORS + 1:
        method, fallback = "pca", True
    if method == "pca":
        coords = _pca_coords(fm.features)
    else:
        coords = _neighbor_graph_coords(fm.features, seed)
    if not np.isfinite(coords).all():
        raise EmbedError("embedding produced non-finite coordinates")
    return Embedding2D(fm.row_ids, coords, seed, method, fallback)


def save_embedding(emb, path, dataset_name, treatment, outcome):
    """Write a cache file: parameter header plus row_id x y lines."""
    with open(path, "w") as f:
        f.write(
            f"# natex-embedding dataset={dataset_name} treatment={treatment} "
            f"outcome={outcome} seed={emb.seed} method={emb.method}\n"
        )
        for rid, (x, y) in zip(emb.row_ids, emb.coords):
            f.write(f"{rid} {float(x)!r} {float(y)!r}\n")


def load_embedding(path):
    with open(path) as f:
        header = f.readline()
        if not header.startswith("# natex-embedding "):
            raise EmbedError(f"not an embedding cache file: {path}")
        params = dict(kv.split("=", 1) for kv in header.split()[2:])
        rids, coords = [], []
        for line in f:
            rid, x, y = line.split()
            rids.append(int(rid))
            coords.append((float(x), float(y)))
    return Embedding2D(
        tuple(rids),
        np.array(coords),
        int(params["seed"]),
        params["method"],
    )


def cache_key(dataset_name, treatment, outcome, seed, method):
    safe = "".join(ch if ch.isalnum() else "_" for ch in f"{dataset_name}")
    return f"{safe}__{treatment}__{outcome}__{seed}__{method}.emb"
