"""Interactive analysis session.

A Session binds one dataset to the current (treatment, outcome) pair,
cluster count, row exclusions, and cluster selection. Every action
recomputes exactly what it must and publishes a fresh immutable
AnalysisSnapshot; embeddings and dendrograms are cached per pair so
changing k, toggling clusters, or excluding rows never re-runs them.
"""

from __future__ import annotations

import collections
import math
import os
import re
from dataclasses import dataclass

import numpy as np

from . import cluster as _cluster
from . import effects, embed, regress
from .data import RowMask

DEFAULT_K = 10
DEFAULT_SEED = int(os.environ.get("NATEX_SEED", "42"))
DEFAULT_METHOD = "neighbor-graph"
N_DISPLAY_COVARIATES = 5
UNDO_DEPTH = 50

PALETTE = (
    "1f77b4", "ff7f0e", "2ca02c", "d62728", "9467bd",
    "8c564b", "e377c2", "7f7f7f", "bcbd22", "17becf",
)

_COLOR_RE = re.compile(r"^[0-9a-fA-F]{6}$")


class SessionError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisSnapshot:
    """Everything the views render, frozen at one version."""

    version: int
    treatment: str
    outcome: str
    k: int
    seed: int
    method: str
    row_ids: tuple
    coords: np.ndarray
    labels: tuple
    sizes: tuple  # post-exclusion member counts per cluster
    t_values: tuple
    o_values: tuple
    fits: dict  # cluster id -> RegressionFit
    overall_fit: regress.RegressionFit
    selection: frozenset
    ate: effects.AteResult
    simpson: effects.SimpsonReport
    excluded_ids: tuple
    cluster_meta: tuple  # ordered (name, color) per cluster
    covariate_display: tuple
    covariate_summaries: dict  # column -> list of per-cluster summary | None


def check_snapshot(snap):
    """Re-evaluate the effect estimate from the snapshot's own parts.

    The stored value must reproduce bit-exactly; returns True or raises.
    """
    if snap.ate.defined:
        n_total = sum(c.n for c in snap.ate.contributions)
        value = math.fsum(c.n * c.b for c in snap.ate.contributions) / n_total
        if n_total != snap.ate.n_total or value != snap.ate.value:
            raise AssertionError("snapshot effect estimate is inconsistent")
        if {c.cluster for c in snap.ate.contributions} != set(snap.selection):
            raise AssertionError("contributions do not match the selection")
    for c, size in enumerate(snap.sizes):
        members = [
            i for i, lab in enumerate(snap.labels)
            if lab == c and snap.row_ids[i] not in snap.excluded_ids
        ]
        if len(members) != size:
            raise AssertionError(f"cluster {c} size mismatch")
    return True


class Session:
    """One analyst's live state; actions serialize through the owner."""

    def __init__(
        self,
        ds,
        treatment,
        outcome,
        k=DEFAULT_K,
        seed=DEFAULT_SEED,
        method=DEFAULT_METHOD,
        cache_dir=None,
    ):
        self.ds = ds
        self.seed = seed
        self.method = method
        self.cache_dir = cache_dir
        self.mask = RowMask()
        self.cluster_meta = {}  # cluster id -> {"name", "color"}
        self.selection = frozenset()
        self.selection_overridden = False
        self.covariate_display = None  # None -> default first five
        self._display_overridden = False
        self.version = 0
        self.last_warnings = []
        self._pair_cache = {}  # (t, o) -> (FeatureMatrix, Embedding2D, Dendrogram)
        self.counters = collections.Counter()
        self._history = collections.deque(maxlen=UNDO_DEPTH)
        self.snapshot = None
        self._set_pair(treatment, outcome)
        self.k = self._clamp_k(k)
        self._recompute_all()

    # -- pipeline ---------------------------------------------------------

    def _set_pair(self, treatment, outcome):
        key = (treatment, outcome, self.seed, self.method)
        if key not in self._pair_cache:
            fm = embed.build_features(self.ds, treatment, outcome)
            self.counters["build_features"] += 1
            emb = self._cached_embedding(fm, treatment, outcome)
            dend = _cluster.build_dendrogram(emb)
            self.counters["build_dendrogram"] += 1
            self._pair_cache[key] = (fm, emb, dend)
        self.treatment, self.outcome = treatment, outcome

    def _cached_embedding(self, fm, treatment, outcome):
        path = None
        if self.cache_dir:
            path = os.path.join(
                self.cache_dir,
                embed.cache_key(self.ds.name, treatment, outcome, self.seed, self.method),
            )
            if os.path.exists(path):
                cached = embed.load_embedding(path)
                if cached.row_ids == fm.row_ids:
                    return cached
        e = embed.embed_2d(fm, seed=self.seed, method=self.method)
        self.counters["embed_2d"] += 1
        if path:
            os.makedirs(self.cache_dir, exist_ok=True)
            embed.save_embedding(e, path, self.ds.name, treatment, outcome)
        return e

    @property
    def _pair(self):
        return self._pair_cache[(self.treatment, self.outcome, self.seed, self.method)]

    def _clamp_k(self, k):
        n = len(self._pair[0].row_ids)
        if not 1 <= k <= n:
            raise SessionError(f"k must be in 1..{n}, got {k}")
        return k

    def _push_history(self):
        if self.snapshot is not None:
            self._history.append(self.snapshot)

    def _postexclusion_sizes(self, assignment, row_ids):
        sizes = [0] * assignment.k
        for rid, lab in zip(row_ids, assignment.labels):
            if rid not in self.mask:
                sizes[lab] += 1
        return tuple(sizes)

    def _meta(self, cluster_id):
        m = self.cluster_meta.get(cluster_id)
        if m is None:
            m = {
                "name": f"Cluster {cluster_id}",
                "color": PALETTE[cluster_id % len(PALETTE)],
            }
        return (m["name"], m["color"])

    def _default_display(self, fm):
        return tuple(fm.feature_names[:N_DISPLAY_COVARIATES])

    def _publish(self, assignment, fits, overall):
        fm, emb, _ = self._pair
        sizes = self._postexclusion_sizes(assignment, fm.row_ids)
        size_map = dict(enumerate(sizes))
        ate_res = effects.ate(fits, size_map, self.selection)
        simpson = effects.detect_simpson(fits, overall)
        if self.covariate_display is None or not self._display_overridden:
            display = self._default_display(fm)
        else:
            display = tuple(
                c for c in self.covariate_display if c in fm.feature_names
            )
        summaries = {}
        for col in display:
            per_cluster = []
            for c in range(assignment.k):
                prof = _cluster.covariate_profile(
                    self.ds, assignment, c, [col], fm.row_ids, self.mask
                )
                per_cluster.append(prof[col])
            summaries[col] = per_cluster
        pos = {rid: i for i, rid in enumerate(self.ds.row_ids)}
        tv = self.ds.values[self.treatment]
        ov = self.ds.values[self.outcome]
        self.version += 1
        self.snapshot = AnalysisSnapshot(
            version=self.version,
            treatment=self.treatment,
            outcome=self.outcome,
            k=self.k,
            seed=self.seed,
            method=emb.method,
            row_ids=fm.row_ids,
            coords=emb.coords,
            labels=tuple(int(l) for l in assignment.labels),
            sizes=sizes,
            t_values=tuple(tv[pos[r]] for r in fm.row_ids),
            o_values=tuple(ov[pos[r]] for r in fm.row_ids),
            fits=dict(fits),
            overall_fit=overall,
            selection=self.selection,
            ate=ate_res,
            simpson=simpson,
            excluded_ids=tuple(sorted(self.mask.excluded_ids)),
            cluster_meta=tuple(self._meta(c) for c in range(assignment.k)),
            covariate_display=display,
            covariate_summaries=summaries,
        )
        self._assignment = assignment
        self._fits = dict(fits)
        return self.snapshot

    def _recompute_all(self, reset_selection=True):
        fm, _, dend = self._pair
        assignment = _cluster.cut(dend, self.k)
        fits = regress.fit_clusters(
            self.ds, self.treatment, self.outcome, assignment, fm.row_ids, self.mask
        )
        active = [r for r in fm.row_ids if r not in self.mask]
        overall = regress.fit_overall(self.ds, self.treatment, self.outcome, active)
        if reset_selection or not self.selection:
            self.selection = frozenset(effects.default_selection(fits))
            self.selection_overridden = False
        else:
            self.selection = frozenset(
                c for c in self.selection if c < assignment.k and fits[c].defined
            )
        return self._publish(assignment, fits, overall)

    # -- actions ----------------------------------------------------------

    def set_variables(self, treatment, outcome):
        if treatment == outcome:
            raise SessionError("treatment and outcome must differ")
        self._push_history()
        old = (self.treatment, self.outcome)
        self._set_pair(treatment, outcome)
        try:
            self.k = self._clamp_k(self.k)
        except SessionError:
            self.k = len(self._pair[0].row_ids)
        try:
            return self._recompute_all(reset_selection=True)
        except Exception:
            self.treatment, self.outcome = old
            raise

    def set_k(self, k):
        k = self._clamp_k(k)
        self._push_history()
        self.k = k
        return self._recompute_all(reset_selection=True)

    def set_selection(self, cluster_ids):
        ids = set(int(c) for c in cluster_ids)
        for c in ids:
            if not 0 <= c < self._assignment.k:
                raise SessionError(f"no such cluster: {c}")
            if not self._fits[c].defined:
                raise SessionError(
                    f"cluster {c} has no defined fit and cannot be selected"
                )
        self._push_history()
        self.selection = frozenset(ids)
        self.selection_overridden = True
        fm, _, _ = self._pair
        return self._publish(self._assignment, self._fits, self.snapshot.overall_fit)

    def toggle_cluster(self, cluster_id):
        c = int(cluster_id)
        if c in self.selection:
            return self.set_selection(self.selection - {c})
        return self.set_selection(self.selection | {c})

    def exclude(self, row_ids):
        known = set(self.ds.row_ids)
        ids = set(int(r) for r in row_ids)
        self.last_warnings = [f"unknown row-id {r}" for r in sorted(ids - known)]
        ids &= known
        new = ids - self.mask.excluded_ids
        if not new:
            return self.snapshot
        self._push_history()
        self.mask = self.mask.with_excluded(new)
        return self._refit_affected(new)

    def include_all(self):
        previously = set(self.mask.excluded_ids)
        if not previously:
            return self.snapshot
        self._push_history()
        self.mask = RowMask()
        return self._refit_affected(previously)

    def _refit_affected(self, changed_ids):
        # clusters keep their labels; only fits touching changed rows move
        fm, _, _ = self._pair
        assignment = self._assignment
        label_of = dict(zip(fm.row_ids, assignment.labels))
        affected = {label_of[r] for r in changed_ids if r in label_of}
        fits = dict(self._fits)
        x_all, y_all = np.asarray(self.snapshot.t_values), np.asarray(self.snapshot.o_values)
        labels = np.asarray(assignment.labels)
        keep = np.array([rid not in self.mask for rid in fm.row_ids])
        for c in affected:
            m = (labels == c) & keep
            fits[c] = regress.ols_fit(x_all[m], y_all[m])
        active = [r for r in fm.row_ids if r not in self.mask]
        overall = regress.fit_overall(self.ds, self.treatment, self.outcome, active)
        self.selection = frozenset(c for c in self.selection if fits[c].defined)
        return self._publish(assignment, fits, overall)

    def rename_cluster(self, cluster_id, name=None, color=None):
        c = int(cluster_id)
        if not 0 <= c < self._assignment.k:
            raise SessionError(f"no such cluster: {c}")
        if color is not None and not _COLOR_RE.match(color):
            raise SessionError(f"bad color {color!r}; expected 6 hex digits")
        self._push_history()
        cur_name, cur_color = self._meta(c)
        self.cluster_meta[c] = {
            "name": name if name is not None else cur_name,
            "color": color.lower() if color is not None else cur_color,
        }
        return self._publish(self._assignment, self._fits, self.snapshot.overall_fit)

    def set_covariate_display(self, columns):
        fm, _, _ = self._pair
        for col in columns:
            if col not in fm.feature_names:
                raise SessionError(f"not a covariate of the current pair: {col!r}")
        self._push_history()
        self.covariate_display = tuple(columns)
        self._display_overridden = True
        return self._publish(self._assignment, self._fits, self.snapshot.overall_fit)

    def undo(self):
        """Restore the previous snapshot's settings (bounded history)."""
        if not self._history:
            raise SessionError("nothing to undo")
        prev = self._history.pop()
        self.mask = RowMask(frozenset(prev.excluded_ids))
        self.selection = prev.selection
        self.k = prev.k
        self.cluster_meta = {
            i: {"name": n, "color": col} for i, (n, col) in enumerate(prev.cluster_meta)
        }
        self._set_pair(prev.treatment, prev.outcome)
        return self._recompute_all(reset_selection=False)
