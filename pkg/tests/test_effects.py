import itertools
import math

import numpy as np
import pytest

from natex.effects import SimpsonReport, ate, default_selection, detect_simpson
from natex.regress import RegressionFit


def fit(slope, p=0.01, defined=True, n=10):
    if not defined:
        return RegressionFit.undefined(n)
    return RegressionFit(slope, 0.0, 0.1, slope / 0.1, p, n, 0.5)


def test_default_selection_rule():
    fits = {0: fit(1, p=0.01), 1: fit(1, p=0.2), 2: fit(1, p=0.04)}
    assert default_selection(fits) == {0, 2}


def test_default_selection_all_undefined():
    fits = {0: fit(0, defined=False), 1: fit(0, defined=False)}
    assert default_selection(fits) == set()


def test_default_selection_all_significant():
    fits = {i: fit(1, p=0.0) for i in range(4)}
    assert default_selection(fits) == {0, 1, 2, 3}


def test_single_cluster_identity():
    res = ate({0: fit(2.0)}, {0: 5}, {0})
    assert res.value == 2.0
    assert res.n_total == 5


def test_two_cluster_hand_example():
    fits = {0: fit(2.0), 1: fit(-2.0)}
    res = ate(fits, {0: 3, 1: 1}, {0, 1})
    assert res.value == pytest.approx(1.0)
    assert res.n_total == 4


def test_empty_selection_undefined():
    res = ate({0: fit(1.0)}, {0: 3}, set())
    assert not res.defined
    assert math.isnan(res.value)


def test_undefined_cluster_rejected():
    with pytest.raises(ValueError):
        ate({0: fit(0, defined=False)}, {0: 3}, {0})


def test_brute_force_equivalence():
    rng = np.random.default_rng(123)
    for _ in range(200):
        m = int(rng.integers(1, 8))
        slopes = rng.normal(scale=5, size=m)
        sizes = rng.integers(3, 50, size=m)
        fits = {i: fit(float(slopes[i])) for i in range(m)}
        size_map = {i: int(sizes[i]) for i in range(m)}
        for r in range(1, m + 1):
            for sel in itertools.combinations(range(m), r):
                res = ate(fits, size_map, set(sel))
                expect = sum(sizes[i] * slopes[i] for i in sel) / sum(
                    sizes[i] for i in sel
                )
                assert res.value == pytest.approx(expect, rel=1e-12)


def test_selection_monotonicity_and_convexity():
    rng = np.random.default_rng(5)
    slopes = rng.normal(size=6)
    sizes = {i: int(rng.integers(1, 20)) for i in range(6)}
    fits = {i: fit(float(slopes[i])) for i in range(6)}
    sel = set()
    last_n = 0
    for c in range(6):
        sel.add(c)
        res = ate(fits, sizes, sel)
        assert res.n_total > last_n
        last_n = res.n_total
        chosen = [slopes[i] for i in sel]
        assert min(chosen) - 1e-12 <= res.value <= max(chosen) + 1e-12


def test_simpson_flags_opposing_significant():
    overall = fit(1.2, p=0.001)
    fits = {0: fit(0.5, p=0.01), 1: fit(-0.3, p=0.02), 2: fit(-0.1, p=0.3)}
    rep = detect_simpson(fits, overall)
    assert rep.flagged == (1,)
    assert rep.overall_slope == 1.2


def test_simpson_needs_significant_overall():
    rep = detect_simpson({0: fit(-1, p=0.001)}, fit(1.2, p=0.5))
    assert rep.flagged == ()


def test_simpson_skips_undefined():
    rep = detect_simpson({0: fit(0, defined=False)}, fit(1.0, p=0.001))
    assert isinstance(rep, SimpsonReport)
    assert rep.flagged == ()
