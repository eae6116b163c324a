"""Simple least-squares regression with slope significance.

The two-sided p-value for the slope comes from the t distribution with
n - 2 degrees of freedom, computed here via the regularized incomplete
beta function so no statistics library is needed at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    stderr_slope: float
    t_stat: float
    p_value: float
    n: int
    r2: float
    defined: bool = True

    @classmethod
    def undefined(cls, n=0):
        return cls(math.nan, math.nan, math.nan, math.nan, math.nan, n, math.nan, False)


def _betacf(a, b, x, max_iter=300, eps=1e-12):
    # continued fraction for the incomplete beta (Lentz's method)
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h


def betainc_reg(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t, df):
    """One-sided upper tail P(T > t) for the t distribution with df dof."""
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    p = 0.5 * betainc_reg(df / 2.0, 0.5, x)
    return p if t >= 0 else 1.0 - p


def two_sided_p(t, df):
    return min(1.0, 2.0 * t_sf(abs(t), df))


def ols_fit(x, y):
    """Least-squares fit of y on x.

    Returns an undefined RegressionFit (no exception) when n < 3 or the
    treatment has zero variance. A perfect fit gets stderr 0 and p 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    n = x.size
    if n < 3:
        return RegressionFit.undefined(n)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0.0:
        return RegressionFit.undefined(n)
    slope = float(dx @ (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float((y - ym) @ (y - ym))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    df = n - 2
    if ss_res <= 0.0:
        return RegressionFit(slope, float(intercept), 0.0, math.inf, 0.0, n, r2)
    stderr = math.sqrt(ss_res / df / sxx)
    t = slope / stderr
    p = two_sided_p(t, df)
    return RegressionFit(slope, float(intercept), stderr, t, p, n, r2)


def _pair_values(ds, treatment, outcome, row_ids):
    pos = {rid: i for i, rid in enumerate(ds.row_ids)}
    tv = ds.values[treatment]
    ov = ds.values[outcome]
    idx = [pos[r] for r in row_ids]
    return (
        np.array([tv[i] for i in idx], dtype=float),
        np.array([ov[i] for i in idx], dtype=float),
    )


def fit_overall(ds, treatment, outcome, row_ids):
    """Fit over all the given (already masked and complete) rows."""
    x, y = _pair_values(ds, treatment, outcome, row_ids)
    return ols_fit(x, y)


def fit_clusters(ds, treatment, outcome, assignment, row_ids, mask):
    """Per-cluster fits over non-excluded members.

    ``assignment.labels`` is aligned with ``row_ids`` (the rows that were
    clustered). Undefined fits are returned as tagged results, never raised.
    """
    x, y = _pair_values(ds, treatment, outcome, row_ids)
    labels = np.asarray(assignment.labels)
    keep = np.array([rid not in mask for rid in row_ids])
    fits = {}
    for c in range(assignment.k):
        m = (labels == c) & keep
        fits[c] = ols_fit(x[m], y[m])
    return fits
