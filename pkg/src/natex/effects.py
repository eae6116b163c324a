"""Weighted average treatment effect over selected clusters.

The effect estimate is the cluster-size weighted mean of per-cluster
regression slopes: ate = (sum n_i * b_i) / N with N = sum n_i over the
selected clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SIGNIFICANCE_LEVEL = 0.05


@dataclass(frozen=True)
class Contribution:
    cluster: int
    n: int
    b: float


@dataclass(frozen=True)
class AteResult:
    value: float
    n_total: int
    contributions: tuple  # of Contribution, ascending cluster id
    defined: bool


@dataclass(frozen=True)
class SimpsonReport:
    overall_slope: float
    flagged: tuple  # cluster ids, ascending


def default_selection(fits):
    """Clusters with a defined fit and p <= 0.05; the rest start deselected."""
    return {
        c for c, f in fits.items() if f.defined and f.p_value <= SIGNIFICANCE_LEVEL
    }


def ate(fits, sizes, selection):
    """Evaluate the size-weighted slope average over ``selection``.

    ``sizes`` maps cluster id to its post-exclusion member count. Clusters
    with undefined fits must not appear in the selection.
    """
    for c in selection:
        if not fits[c].defined:
            raise ValueError(f"cluster {c} has no defined fit and cannot be selected")
    contributions = tuple(
        Contribution(c, sizes[c], fits[c].slope) for c in sorted(selection)
    )
    n_total = sum(c.n for c in contributions)
    if n_total == 0:
        return AteResult(math.nan, 0, contributions, False)
    value = math.fsum(c.n * c.b for c in contributions) / n_total
    return AteResult(value, n_total, contributions, True)


def detect_simpson(fits, overall):
    """Flag significant cluster slopes opposing a significant overall slope."""
    if not overall.defined or overall.p_value > SIGNIFICANCE_LEVEL:
        return SimpsonReport(overall.slope if overall.defined else math.nan, ())
    sign = 1.0 if overall.slope > 0 else -1.0
    flagged = tuple(
        c
        for c in sorted(fits)
        if fits[c].defined
        and fits[c].p_value <= SIGNIFICANCE_LEVEL
        and fits[c].slope * sign < 0
    )
    return SimpsonReport(overall.slope, flagged)
