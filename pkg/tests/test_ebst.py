import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_split
from tskstreams.ebst import SplitTree


def test_three_point_example():
    tree = SplitTree()
    for k, y in ((1, 1), (2, 2), (3, 10)):
        tree.insert(k, 1.0, y)
    res = tree.best_split()
    assert res.q == 2
    assert res.variance_reduction == pytest.approx(16.0556, abs=1e-4)
    assert res.left_weight == 2 and res.right_weight == 1
    assert res.next_key == 3


def test_constant_targets_give_zero_reduction():
    tree = SplitTree()
    for k in range(10):
        tree.insert(float(k), 0.5, 3.0)
    assert tree.best_split().variance_reduction == pytest.approx(0.0, abs=1e-12)


def test_single_key_and_empty_tree():
    tree = SplitTree()
    assert tree.best_split() is None
    tree.insert(1.0, 1.0, 2.0)
    tree.insert(1.0, 1.0, 5.0)
    assert tree.best_split() is None


def test_totals_match_batch_sums():
    tree = SplitTree()
    pts = [(0.5, 0.2, 1.0), (-1.0, 0.9, 3.0), (2.0, 0.4, -2.0)]
    for k, w, y in pts:
        tree.insert(k, w, y)
    stats = tree.prefix_stats(math.inf)
    assert stats[1] == pytest.approx(sum(w for _, w, _ in pts))
    assert stats[2] == pytest.approx(sum(w * y for _, w, y in pts))
    assert stats[3] == pytest.approx(sum(w * y * y for _, w, y in pts))


def test_duplicate_key_accumulates():
    tree = SplitTree()
    tree.insert(1.0, 0.5, 2.0)
    tree.insert(1.0, 0.5, 2.0)
    assert len(tree) == 1
    (key, own), = tree.items()
    assert own[0] == 2 and own[1] == 1.0 and own[2] == 2.0


def test_rejects_bad_inputs():
    tree = SplitTree()
    with pytest.raises(ValueError):
        tree.insert(math.nan, 1.0, 1.0)
    with pytest.raises(ValueError):
        tree.insert(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        tree.insert(1.0, 1.0, math.inf)


def test_random_inserts_in_order_sorted():
    rng = np.random.default_rng(0)
    tree = SplitTree()
    for k in rng.normal(size=1000):
        tree.insert(float(k), 1.0, 0.0)
    keys = tree.keys()
    assert keys == sorted(keys)


def test_support_restricts_thresholds():
    tree = SplitTree()
    for k, y in ((1, 0), (2, 0), (3, 10), (4, 10)):
        tree.insert(float(k), 1.0, float(y))
    assert tree.best_split().q == 2
    res = tree.best_split((2.5, 10))
    assert res.q == 3
    assert res.left_weight == 3


def test_key_cap_merges_into_nearest():
    tree = SplitTree(max_keys=3)
    for k in (0.0, 10.0, 20.0):
        tree.insert(k, 1.0, 0.0)
    tree.insert(12.0, 1.0, 5.0)
    tree.insert(16.0, 1.0, 5.0)
    assert tree.keys() == [0.0, 10.0, 20.0]
    counts = dict((k, own[0]) for k, own in tree.items())
    assert counts == {0.0: 1, 10.0: 2, 20.0: 2}


def test_scaled_targets_variant():
    tree = SplitTree(scaled_targets=True)
    rows = [(1.0, 0.5, 2.0), (2.0, 1.0, 2.0), (3.0, 0.25, 8.0)]
    for k, w, y in rows:
        tree.insert(k, w, y)
    wy = np.array([w * y for _, w, y in rows])
    res = tree.best_split()
    cut = sum(k <= res.q for k, _, _ in rows)
    lw = sum(w for k, w, _ in rows if k <= res.q) / 1.75
    expected = wy.var() - (lw * wy[:cut].var() + (1 - lw) * wy[cut:].var())
    assert res.variance_reduction == pytest.approx(expected, rel=1e-12)


def test_dump_csv_has_cumulative_rows():
    tree = SplitTree()
    tree.insert(2.0, 1.0, 1.0)
    tree.insert(1.0, 1.0, 3.0)
    lines = tree.dump_csv().strip().splitlines()
    assert lines[0] == "key,count,sum_w,sum_wy,sum_wy2"
    assert lines[1].startswith("1.0,1.0,1.0,3.0")
    assert lines[2].startswith("2.0,2.0,2.0,4.0")


@st.composite
def weighted_points(draw):
    n = draw(st.integers(2, 60))
    keys = draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n))
    ys = draw(st.lists(st.floats(-100, 100), min_size=n, max_size=n))
    return [float(k) for k in keys], weights, ys


@settings(max_examples=200, deadline=None)
@given(weighted_points())
def test_best_split_matches_brute_force(points):
    keys, weights, ys = points
    tree = SplitTree()
    for k, w, y in zip(keys, weights, ys):
        tree.insert(k, w, y)
    got = tree.best_split()
    want = brute_force_split(keys, weights, ys)
    if want is None:
        assert got is None
        return
    scale = max(1.0, abs(want[1]))
    assert got.variance_reduction == pytest.approx(want[1], rel=1e-8, abs=1e-8 * scale)
    if got.q != want[0]:
        # only acceptable for numerically tied thresholds
        alt = brute_force_split(keys, weights, ys, (got.q, got.q))
        assert alt[1] == pytest.approx(want[1], rel=1e-9, abs=1e-9 * scale)


@settings(max_examples=100, deadline=None)
@given(weighted_points(), st.floats(-25, 25))
def test_prefix_stats_match_batch(points, threshold):
    keys, weights, ys = points
    tree = SplitTree()
    for k, w, y in zip(keys, weights, ys):
        tree.insert(k, w, y)
    stats = tree.prefix_stats(threshold)
    sel = [(w, y) for k, w, y in zip(keys, weights, ys) if k <= threshold]
    assert stats[0] == len(sel)
    assert stats[1] == pytest.approx(math.fsum(w for w, _ in sel), rel=1e-9, abs=1e-9)
    assert stats[2] == pytest.approx(math.fsum(w * y for w, y in sel), rel=1e-8, abs=1e-7)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_visits_bounded_by_height(keys):
    tree = SplitTree()
    for k in keys:
        visits = tree.insert(k, 1.0, 1.0)
        assert visits <= tree.height()


@settings(max_examples=100, deadline=None)
@given(weighted_points())
def test_reduction_never_negative(points):
    keys, weights, ys = points
    tree = SplitTree()
    for k, w, y in zip(keys, weights, ys):
        tree.insert(k, w, y)
    res = tree.best_split()
    if res is not None:
        assert res.variance_reduction >= -1e-9
        assert res.left_weight > 0 and res.right_weight > 0
