import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from msmdopt.analysis import (
    bk1_front_distance,
    dominates,
    front_distance,
    hypervolume,
    nondominated_filter,
    rate_slope,
)
from msmdopt.core import DimensionError

from oracles import mc_hypervolume, naive_nondominated


def test_filter_examples():
    f = nondominated_filter([(1, 2), (2, 1), (2, 2)])
    assert sorted(map(tuple, f.points)) == [(1, 2), (2, 1)]
    np.testing.assert_array_equal(f.dominated, [[2, 2]])
    assert len(nondominated_filter([(1, 1), (1, 1)])) == 2
    single = nondominated_filter([(3, 4)])
    np.testing.assert_array_equal(single.points, [[3, 4]])
    assert len(nondominated_filter(np.zeros((0, 2)))) == 0
    with pytest.raises(DimensionError):
        nondominated_filter([(1, 2)], origins=[0, 1])


def test_filter_origins_track_runs():
    f = nondominated_filter([(1, 2), (3, 3), (2, 1)], origins=["a", "b", "c"])
    assert f.origins == ["a", "c"]
    np.testing.assert_array_equal(f.indices, [0, 2])


def test_dominates():
    assert dominates([1, 1], [1, 2])
    assert not dominates([1, 1], [1, 1])
    assert not dominates([0, 2], [1, 1])


def test_filter_matches_naive():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        m = int(rng.integers(2, 4))
        k = int(rng.integers(1, 201))
        # integer coordinates make ties and duplicates common
        P = rng.integers(0, 12, size=(k, m)).astype(float) if rng.random() < 0.5 else rng.random((k, m))
        assert set(nondominated_filter(P).indices.tolist()) == set(naive_nondominated(P))


def test_hypervolume_examples():
    assert hypervolume(np.array([[1.0, 2.0], [2.0, 1.0]]), [3, 3]) == pytest.approx(3.0)
    assert hypervolume(np.array([[1.0, 1.0]]), [2, 2]) == pytest.approx(1.0)
    assert hypervolume(np.zeros((0, 2)), [1, 1]) == 0.0
    assert hypervolume(np.array([[0.0, 0.0, 0.0]]), [1, 2, 3]) == pytest.approx(6.0)
    with pytest.raises(ValueError, match=r"indices \[1\]"):
        hypervolume(np.array([[0.0, 0.0], [5.0, 0.0]]), [3, 3])


def test_hypervolume_against_monte_carlo():
    rng = np.random.default_rng(1)
    for trial in range(50):
        m = 2 + trial % 2
        pts = nondominated_filter(rng.random((int(rng.integers(1, 30)), m))).points
        ref = np.ones(m) * 1.1
        exact = hypervolume(pts, ref)
        est, se = mc_hypervolume(pts, ref, 1_000_000, rng)
        assert abs(exact - est) <= 3 * se + 1e-12


point_sets = st.integers(2, 3).flatmap(
    lambda m: arrays(np.float64, st.tuples(st.integers(1, 25), st.just(m)), elements=st.floats(0, 1)))


@given(point_sets, st.data())
def test_hypervolume_monotone(P, data):
    m = P.shape[1]
    ref = np.full(m, 2.0)
    extra = np.array(data.draw(st.lists(st.floats(0, 1.9), min_size=m, max_size=m)))
    assert hypervolume(np.vstack([P, extra]), ref) >= hypervolume(P, ref) - 1e-12


@given(point_sets, st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_hypervolume_translation(P, shift):
    m = P.shape[1]
    s = np.array(shift[:m])
    ref = np.full(m, 1.5)
    assert hypervolume(P + s, ref + s) == pytest.approx(hypervolume(P, ref), rel=1e-9, abs=1e-9)


def test_bk1_distance_examples():
    assert bk1_front_distance([2, 2]) == 0.0
    assert bk1_front_distance([1, 0]) == pytest.approx(math.sqrt(0.5))
    assert bk1_front_distance([6, 6]) == pytest.approx(math.sqrt(2))
    with pytest.raises(DimensionError):
        bk1_front_distance([1, 2, 3])


def test_front_distance():
    T = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(front_distance([[0.0, 1.0], [1.0, 1.0]], T), [0.0, 1.0])


def test_rate_slope_examples():
    K = np.array([25, 50, 100, 200])
    assert rate_slope(K, 3 / np.sqrt(K)) == pytest.approx(-0.5, abs=1e-9)
    assert rate_slope(K, np.full(4, 2.0)) == pytest.approx(0.0, abs=1e-12)
    assert rate_slope(K, 7 / K) == pytest.approx(-1.0, abs=1e-9)
    with pytest.raises(ValueError):
        rate_slope([1, 2], [1, 1])
    with pytest.raises(ValueError):
        rate_slope([1, 2, 3], [1, 0, 1])
