import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, strategies as st

from natex.data import RowMask, active_rows
from natex.regress import ols_fit, t_sf, two_sided_p


def test_perfect_fit():
    f = ols_fit([0, 1, 2], [0, 1, 2])
    assert f.defined
    assert f.slope == pytest.approx(1.0)
    assert f.intercept == pytest.approx(0.0)
    assert f.p_value == 0.0
    assert f.stderr_slope == 0.0


def test_flat_line():
    f = ols_fit([0, 1, 2, 3], [1, 1, 1, 1])
    assert f.slope == pytest.approx(0.0)
    assert f.intercept == pytest.approx(1.0)


def test_hand_computed_example():
    # closed-form sums: Sxx=5, Sxy=3, SSres=3.2 -> se=sqrt(1.6/5), p=I_x(1,1/2)=0.4
    f = ols_fit([1, 2, 3, 4], [2, 1, 4, 3])
    assert f.slope == pytest.approx(0.6, abs=1e-12)
    assert f.intercept == pytest.approx(1.0, abs=1e-12)
    assert f.stderr_slope == pytest.approx(math.sqrt(1.6 / 5), abs=1e-9)
    assert f.t_stat == pytest.approx(0.6 / math.sqrt(1.6 / 5), abs=1e-9)
    assert f.p_value == pytest.approx(0.4, abs=1e-9)


def test_undefined_small_n_and_zero_variance():
    assert not ols_fit([1, 2], [1, 2]).defined
    assert not ols_fit([5, 5, 5, 5], [1, 2, 3, 4]).defined
    assert not ols_fit([], []).defined


def test_length_mismatch():
    with pytest.raises(ValueError):
        ols_fit([1, 2, 3], [1, 2])


@pytest.mark.parametrize("df", list(range(1, 101)))
def test_t_tail_matches_reference(df):
    for t in (-8.0, -2.5, -0.3, 0.0, 0.7, 1.96, 4.0, 25.0):
        assert t_sf(t, df) == pytest.approx(scipy.stats.t.sf(t, df), abs=1e-6)


def test_p_value_range():
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = rng.normal(size=20)
        y = rng.normal(size=20)
        f = ols_fit(x, y)
        assert 0.0 <= f.p_value <= 1.0


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@given(
    st.lists(st.tuples(finite, finite), min_size=5, max_size=30),
    st.floats(min_value=0.1, max_value=50),
    st.floats(min_value=0.1, max_value=50),
)
def test_affine_equivariance(pairs, cx, cy):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    base = ols_fit(x, y)
    if not base.defined or base.stderr_slope == 0 or abs(base.t_stat) > 1e8:
        return  # exact or numerically-perfect fits: t is rounding noise
    scaled = ols_fit(cx * x, cy * y)
    assert scaled.slope == pytest.approx(base.slope * cy / cx, rel=1e-9)
    assert scaled.t_stat == pytest.approx(base.t_stat, rel=1e-9)
    assert scaled.p_value == pytest.approx(base.p_value, rel=1e-9, abs=1e-15)


@given(
    st.lists(st.tuples(finite, finite), min_size=5, max_size=30),
    st.floats(min_value=-100, max_value=100),
    st.floats(min_value=-100, max_value=100),
)
def test_shift_invariance(pairs, dx, dy):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    base = ols_fit(x, y)
    if not base.defined or base.stderr_slope == 0 or abs(base.t_stat) > 1e8:
        return
    shifted = ols_fit(x + dx, y + dy)
    assert shifted.slope == pytest.approx(base.slope, rel=1e-6, abs=1e-9)
    assert shifted.stderr_slope == pytest.approx(base.stderr_slope, rel=1e-6)
    assert shifted.p_value == pytest.approx(base.p_value, rel=1e-6, abs=1e-12)


def test_two_sided_cap():
    assert two_sided_p(0.0, 5) == 1.0


def _pair_arrays(ds, t, o):
    ids = active_rows(ds, RowMask(), [t, o])
    pos = {r: i for i, r in enumerate(ds.row_ids)}
    xs = np.array([ds.values[t][pos[r]] for r in ids])
    ys = np.array([ds.values[o][pos[r]] for r in ids])
    return xs, ys


def test_auto_mpg_weight_slope(auto_mpg):
    # closed-form over all complete weight/mpg rows
    x, y = _pair_arrays(auto_mpg, "weight", "mpg")
    f = ols_fit(x, y)
    assert f.slope == pytest.approx(-0.0077, abs=2e-4)
    assert f.slope < 0


def test_auto_mpg_acceleration_slope(auto_mpg):
    from natex.embed import build_features
    from natex.regress import fit_overall

    fm = build_features(auto_mpg, "acceleration", "mpg")
    assert len(fm.row_ids) == 392
    f = fit_overall(auto_mpg, "acceleration", "mpg", fm.row_ids)
    assert f.slope == pytest.approx(1.20, abs=0.03)
