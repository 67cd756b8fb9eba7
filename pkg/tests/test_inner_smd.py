import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from msmdopt.core import OracleError, StochasticOracle, linear_problem
from msmdopt.inner_smd import (
    InnerSchedule,
    InnerState,
    compute_m0_star,
    compute_m_star,
    inner_step_size,
    run_inner,
    run_inner_reference,
    smd_step,
    subproblem_gradient,
    tail_start,
)
from msmdopt.benchmarks import get_problem

from oracles import minnorm_two


def test_subproblem_gradient_examples():
    g_d, g_lam = subproblem_gradient(np.array([[1.0], [-1.0]]), np.zeros(1), np.array([0.5, 0.5]))
    np.testing.assert_array_equal(g_d, [0.0])
    np.testing.assert_array_equal(g_lam, [0.0, 0.0])
    g_d, g_lam = subproblem_gradient(np.eye(2), np.zeros(2), np.array([0.5, 0.5]))
    np.testing.assert_allclose(g_d, [0.5, 0.5])
    np.testing.assert_array_equal(g_lam, [0.0, 0.0])
    G = np.array([[1.0, 2.0], [0.0, -1.0]])
    d, lam = np.array([0.3, -0.2]), np.array([0.4, 0.6])
    a = subproblem_gradient(G, d, lam)
    b = subproblem_gradient(G, d, lam, g0=np.array([5.0, 5.0]), mu=0.0)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_smd_step_zero_gradient_shrinks_direction():
    s = InnerState(np.array([0.4, -0.2]), np.array([0.3, 0.7]), 1.0)
    out = smd_step(s, np.zeros((2, 2)), 0.25)
    np.testing.assert_allclose(out.d, 0.75 * s.d)
    np.testing.assert_allclose(out.lam, s.lam)


def test_smd_step_saddle_fixed_point():
    s = InnerState.initial(2, 1, 1.0)
    out = smd_step(s, np.array([[1.0], [-1.0]]), 0.3)
    np.testing.assert_array_equal(out.d, s.d)
    np.testing.assert_array_equal(out.lam, s.lam)


def test_smd_step_duplicated_objective():
    g = np.array([2.0, -1.0])
    s = InnerState.initial(2, 2, 0.1 * np.linalg.norm(g) + 1e-12)
    out = smd_step(s, np.vstack([g, g]), 0.1)
    np.testing.assert_allclose(out.d, -0.1 * g)
    np.testing.assert_allclose(out.lam, [0.5, 0.5])


def test_m_star_examples():
    assert compute_m_star(2, 1.0, 0.0) ** 2 == pytest.approx(4 * (2 + math.log(2)))
    assert compute_m_star(2, 1.0, 0.0) == pytest.approx(3.2822, abs=1e-4)
    assert compute_m_star(2, 1.0, 1.0) ** 2 == pytest.approx(15.5452, abs=1e-4)
    with pytest.raises(ValueError):
        compute_m_star(1, 1.0, 0.0)
    # with mu = 0 and the preference delta at zero the constant only depends on C_f and delta
    assert compute_m0_star(2, 1.0, 0.0, 0.0, 1.0) ** 2 == pytest.approx(9 + 2 * 2 * math.log(2))


def test_step_size_examples():
    assert inner_step_size(InnerSchedule.fixed(1, 2), 1, 100) == pytest.approx(0.05)
    assert inner_step_size(InnerSchedule.varying(1, 2), 4, 100) == pytest.approx(0.25)
    for kind in ("fixed", "varying"):
        a = InnerSchedule(kind, 1.0, 3.0).step_sizes(50)
        b = InnerSchedule(kind, 2.0, 3.0).step_sizes(50)
        np.testing.assert_allclose(b, 2 * a)
    with pytest.raises(IndexError):
        InnerSchedule.fixed(1, 1).step_size(0, 10)
    np.testing.assert_array_equal(InnerSchedule.constant(0.01).step_sizes(3), [0.01] * 3)


def test_tail_start():
    assert tail_start(300, 0.5) == 150
    assert tail_start(30, 0.1) == 3
    assert tail_start(1, 0.5) == 1
    with pytest.raises(ValueError):
        tail_start(10, 1.0)


def _oracle(G, rho=0.0, seed=0):
    return StochasticOracle(linear_problem(np.asarray(G, dtype=float)), rho, seed=seed)


def test_run_inner_symmetric_saddle():
    orc = _oracle([[1.0], [-1.0]])
    res = run_inner(orc, np.zeros(1), InnerSchedule.fixed(1.0, compute_m_star(2, 1.0, 0.0)), 1000)
    assert abs(res.d_avg[0]) <= 1e-3
    np.testing.assert_allclose(res.lam_avg, [0.5, 0.5], atol=1e-3)
    assert res.P == 500


def test_run_inner_orthogonal_pair():
    orc = _oracle(np.eye(2))
    res = run_inner(orc, np.zeros(2), InnerSchedule.fixed(1.0, compute_m_star(2, 1.0, 0.0)), 10_000)
    np.testing.assert_allclose(res.d_avg, [-0.5, -0.5], atol=1e-2)
    np.testing.assert_allclose(res.lam_avg, [0.5, 0.5], atol=1e-2)


def _random_pair(rng, n):
    G = rng.normal(size=(2, n))
    return G / np.linalg.norm(G, axis=1, keepdims=True) * rng.uniform(0.5, 1.0, size=(2, 1))


def test_run_inner_converges_to_min_norm():
    rng = np.random.default_rng(21)
    errs_short, errs_long = [], []
    for trial in range(100):
        G = _random_pair(rng, (2, 5, 10)[trial % 3])
        orc = _oracle(G)
        sched = InnerSchedule.fixed(1.0, compute_m_star(2, orc.gradient_bound, 0.0))
        d_star = minnorm_two(G[0], G[1])[1]
        errs_short.append(np.linalg.norm(run_inner(orc, np.zeros(G.shape[1]), sched, 10_000).d_avg - d_star))
        errs_long.append(np.linalg.norm(run_inner(orc, np.zeros(G.shape[1]), sched, 40_000).d_avg - d_star))
    assert max(errs_short) <= 5e-2
    assert np.median(errs_long) <= np.median(errs_short)


@given(st.integers(0, 2**31), st.sampled_from(["fixed", "varying", "constant"]),
       st.integers(1, 200), st.floats(0.05, 0.95), st.booleans())
def test_kernel_matches_reference(seed, kind, S, r, with_pref):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 4), rng.integers(1, 5)
    orc = _oracle(rng.normal(size=(m, n)), rho=0.5, seed=seed)
    sched = InnerSchedule(kind, 0.3, 1.7)
    pref = (rng.dirichlet(np.ones(m)), 0.8) if with_pref else None
    a = StochasticOracle(orc.problem, 0.5, seed=seed)
    res = run_inner(orc, np.zeros(n), sched, S, r, radius=2.0, preference=pref)
    ref = run_inner_reference(a.sample_block(np.zeros(n), S), sched, r, 2.0, pref)
    np.testing.assert_allclose(res.d_avg, ref.d_avg, rtol=0, atol=1e-12)
    np.testing.assert_allclose(res.lam_avg, ref.lam_avg, rtol=0, atol=1e-12)


@given(st.integers(0, 2**31), st.integers(1, 300))
def test_invariants_along_the_path(seed, S):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 4), rng.integers(1, 4)
    G = rng.normal(size=(m, n)) * 5
    state = InnerState.initial(m, n, 1.0)
    gammas = InnerSchedule.constant(rng.uniform(0.01, 2)).step_sizes(S)
    for s in range(S):
        state = smd_step(state, G + rng.normal(size=G.shape), gammas[s])
        assert abs(state.lam.sum() - 1) <= 1e-12 and np.all(state.lam > 0)
        assert np.linalg.norm(state.d) <= 1.0 + 1e-9
    orc = _oracle(G, 1.0, seed)
    res = run_inner(orc, np.zeros(n), InnerSchedule.constant(0.5), S, radius=1.0)
    assert abs(res.lam_avg.sum() - 1) <= 1e-12 and np.all(res.lam_avg >= 0)
    assert np.linalg.norm(res.d_avg) <= 1.0 + 1e-9


def test_draw_count_and_reproducibility():
    inst = get_problem("bk1").instance
    x = np.array([1.0, -2.0])
    a = StochasticOracle(inst, 0.3, seed=8)
    b = StochasticOracle(inst, 0.3, seed=8)
    sched = InnerSchedule.constant(0.01)
    ra = run_inner(a, x, sched, 321)
    rb = run_inner(b, x, sched, 321)
    assert a.draws == 321
    np.testing.assert_array_equal(ra.d_avg, rb.d_avg)
    np.testing.assert_array_equal(ra.lam_avg, rb.lam_avg)


def test_trace_records_every_step():
    res = run_inner(_oracle(np.eye(2)), np.zeros(2), InnerSchedule.constant(0.1), 50, trace=True)
    assert res.trace.shape == (50,)
    assert np.all(res.trace <= res.radius + 1e-12)


class _BrokenOracle(StochasticOracle):
    def sample_block(self, x, count):
        out = super().sample_block(x, count)
        out[7, 0, 0] = np.nan
        return out


def test_non_finite_sample_reports_iteration():
    orc = _BrokenOracle(linear_problem(np.eye(2)), 0.0)
    with pytest.raises(OracleError) as exc:
        run_inner(orc, np.zeros(2), InnerSchedule.constant(0.1), 20)
    assert exc.value.iteration == 8
