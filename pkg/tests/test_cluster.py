import numpy as np
import pytest

from natex.cluster import (
    build_dendrogram,
    covariate_profile,
    cut,
    dumps_dendrogram,
    loads_dendrogram,
    naive_ward,
)
from natex.data import RowMask, load_csv


def canon(labels):
    seen = {}
    return tuple(seen.setdefault(l, len(seen)) for l in labels)


LINE4 = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 0.0], [10.1, 0.0]])


def test_line_example_merge_order():
    d = build_dendrogram(LINE4)
    first_two = {tuple(sorted(map(int, d.merges[i, :2]))) for i in range(2)}
    assert first_two == {(0, 1), (2, 3)}
    assert d.merges[-1, 2] == d.merges[:, 2].max()


def test_line_example_cut_k2():
    d = build_dendrogram(LINE4)
    labels = cut(d, 2).labels
    assert canon(labels) == (0, 0, 1, 1)
    assert canon(cut(naive_ward(LINE4), 2).labels) == (0, 0, 1, 1)


def test_two_points():
    d = build_dendrogram(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert d.n_leaves == 2
    assert d.merges.shape == (1, 3)


def test_duplicates_merge_first():
    pts = np.array([[1.0, 1.0], [3.0, 0.0], [1.0, 1.0], [5.0, 2.0]])
    d = build_dendrogram(pts)
    assert d.merges[0, 2] == 0.0
    assert tuple(sorted(map(int, d.merges[0, :2]))) == (0, 2)


def test_cut_extremes():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(12, 2))
    d = build_dendrogram(pts)
    assert canon(cut(d, 1).labels) == tuple([0] * 12)
    assert cut(d, 12).sizes == tuple([1] * 12)
    with pytest.raises(ValueError):
        cut(d, 0)
    with pytest.raises(ValueError):
        cut(d, 13)


def test_too_few_points():
    with pytest.raises(ValueError):
        build_dendrogram(np.array([[1.0, 2.0]]))


def test_oracle_equivalence_random_sets():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(4, 80))
        pts = rng.normal(size=(n, 2))
        d = build_dendrogram(pts)
        o = naive_ward(pts)
        for k in range(1, n + 1):
            assert canon(cut(d, k).labels) == canon(cut(o, k).labels)


def test_nestedness():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(60, 2))
    d = build_dendrogram(pts)
    prev = cut(d, 1).labels
    for k in range(2, 61):
        cur = cut(d, k).labels
        # each new cluster maps into exactly one old cluster
        mapping = {}
        for old, new in zip(prev, cur):
            mapping.setdefault(new, set()).add(old)
        assert all(len(v) == 1 for v in mapping.values())
        assert len(set(map(tuple, [cur]))) == 1  # sanity
        prev = cur


def test_cut_never_reads_coords():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(40, 2))
    d = build_dendrogram(pts)
    want = [canon(cut(d, k).labels) for k in range(1, 41)]
    pts[:] = np.nan  # corrupt the source array after construction
    got = [canon(cut(d, k).labels) for k in range(1, 41)]
    assert want == got


def test_canonical_labels_by_smallest_member():
    rng = np.random.default_rng(9)
    pts = rng.normal(size=(30, 2))
    a = cut(build_dendrogram(pts), 5)
    firsts = {}
    for i, lab in enumerate(a.labels):
        firsts.setdefault(int(lab), i)
    # label c's first member appears before label c+1's first member
    order = [firsts[c] for c in range(5)]
    assert order == sorted(order)


def test_sizes_sum():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(25, 2))
    a = cut(build_dendrogram(pts), 4)
    assert sum(a.sizes) == 25
    assert all(s > 0 for s in a.sizes)


def test_serialization_roundtrip():
    rng = np.random.default_rng(2)
    d = build_dendrogram(rng.normal(size=(17, 2)))
    text = dumps_dendrogram(d)
    assert text.startswith("n 17\n")
    d2 = loads_dendrogram(text)
    assert d2.n_leaves == 17
    assert np.array_equal(d.merges, d2.merges)


def test_leaf_order_is_permutation():
    rng = np.random.default_rng(4)
    d = build_dendrogram(rng.normal(size=(23, 2)))
    assert sorted(d.leaf_order()) == list(range(23))


class _FakeAssignment:
    def __init__(self, labels, k):
        self.labels = labels
        self.k = k


def test_covariate_profile_constant():
    ds = load_csv("v\n5\n5\n5")
    a = _FakeAssignment([0, 0, 0], 1)
    prof = covariate_profile(ds, a, 0, ["v"], [0, 1, 2])
    s = prof["v"]
    assert s["min"] == s["max"] == s["mean"] == 5.0
    assert sum(1 for h in s["hist"] if h > 0) == 1
    assert sum(s["hist"]) == 3


def test_covariate_profile_empty_cases():
    ds = load_csv("v\n1\n2\n3")
    a = _FakeAssignment([0, 0, 1], 2)
    assert covariate_profile(ds, a, 0, [], [0, 1, 2]) == {}
    masked = covariate_profile(ds, a, 0, ["v"], [0, 1, 2], RowMask(frozenset({0, 1})))
    assert masked["v"] is None
    with pytest.raises(ValueError):
        covariate_profile(ds, a, 5, ["v"], [0, 1, 2])
