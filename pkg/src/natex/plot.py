"""Static rendering of the effect view for CLI reports."""

from __future__ import annotations

import numpy as np


def plot_effect_view(snap, path):
    """Scatter of (treatment, outcome) with per-cluster regression lines
    and the unclustered overall fit as a faint dashed line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = np.asarray(snap.t_values)
    o = np.asarray(snap.o_values)
    labels = np.asarray(snap.labels)
    excluded = np.array([rid in set(snap.excluded_ids) for rid in snap.row_ids])

    fig, ax = plt.subplots(figsize=(7, 5))
    for c in range(snap.k):
        name, color = snap.cluster_meta[c]
        m = (labels == c) & ~excluded
        selected = c in snap.selection
        col = f"#{color}" if selected else "#bbbbbb"
        ax.scatter(t[m], o[m], s=12, color=col, alpha=0.7, label=name)
        fit = snap.fits[c]
        if fit.defined and m.any():
            xs = np.array([t[m].min(), t[m].max()])
            ax.plot(xs, fit.intercept + fit.slope * xs, color=col, lw=2)
    if snap.overall_fit.defined and (~excluded).any():
        xs = np.array([t[~excluded].min(), t[~excluded].max()])
        ax.plot(
            xs,
            snap.overall_fit.intercept + snap.overall_fit.slope * xs,
            color="gray",
            ls="--",
            lw=1,
            alpha=0.5,
        )
    ate_txt = f"{snap.ate.value:.2f}" if snap.ate.defined else "no selection"
    ax.set_title(f"{snap.treatment} → {snap.outcome}   ATE = {ate_txt}")
    ax.set_xlabel(snap.treatment)
    ax.set_ylabel(snap.outcome)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
