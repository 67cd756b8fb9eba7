import math

import numpy as np
import pytest

from msmdopt.analysis import bk1_front_distance
from msmdopt.baselines import mgda_minnorm, mgda_step
from msmdopt.benchmarks import get_problem, multi_start
from msmdopt.core import ProblemInstance, StochasticOracle, linear_problem
from msmdopt.inner_smd import InnerSchedule, compute_m0_star, compute_m_star
from msmdopt.msmd import (
    DivergenceError,
    InnerBudgetRule,
    OuterSchedule,
    PreferenceSpec,
    default_inner_schedule,
    inner_budget,
    outer_step_size,
    pareto_stationarity_measure,
    solve,
    solve_with_preference,
)


def test_outer_step_sizes():
    assert outer_step_size(OuterSchedule.varying(1.0), 0) == 1.0
    assert outer_step_size(OuterSchedule.varying(1.0), 9) == pytest.approx(0.1)
    assert all(outer_step_size(OuterSchedule.fixed(0.01), k) == 0.01 for k in range(50))
    with pytest.raises(ValueError):
        OuterSchedule("adaptive", 1.0)


def test_inner_budgets():
    assert inner_budget(InnerBudgetRule("global_square"), 5, 100) == 10201
    assert inner_budget(InnerBudgetRule("per_iter_square"), 2, 100) == 9
    assert inner_budget(InnerBudgetRule.explicit(300), 7, 100) == 300
    with pytest.raises(ValueError):
        InnerBudgetRule.explicit(0)


def test_stationarity_measure():
    g = np.array([1.0, -3.0])
    assert pareto_stationarity_measure(np.vstack([g, -g])) == pytest.approx(0.0, abs=1e-15)
    assert pareto_stationarity_measure(np.eye(2)) == pytest.approx(math.sqrt(0.5))
    assert pareto_stationarity_measure(np.zeros((3, 2))) == 0.0


def _quad_pair():
    """Two copies of ||x - (1, 2)||^2."""
    c = np.array([1.0, 2.0])

    def f(x):
        v = float(np.sum((x - c) ** 2))
        return np.array([v, v])

    def g(x):
        row = 2 * (x - c)
        return np.vstack([row, row])

    return ProblemInstance("quad", 2, 2, np.full(2, -5.0), np.full(2, 5.0), f, g)


def test_single_effective_objective_descends():
    prob = _quad_pair()
    orc = StochasticOracle(prob, 0.0)
    traj = solve(prob, orc, np.array([4.0, -3.0]), 30, OuterSchedule.fixed(0.05),
                 InnerSchedule.constant(0.05), InnerBudgetRule.explicit(300))
    F = np.array([row.F[0] for row in traj.rows])
    assert np.all(np.diff(F) < 0)
    assert F[-1] < 1e-2 * F[0]


def test_zero_step_keeps_point():
    prob = get_problem("bk1").instance
    x0 = np.array([2.0, -1.0])
    traj = solve(prob, StochasticOracle(prob, 0.5), x0, 1, OuterSchedule.fixed(0.0),
                 InnerSchedule.constant(0.01), InnerBudgetRule.explicit(10))
    np.testing.assert_array_equal(traj.terminal, x0)
    assert len(traj) == 2 and traj.rows[-1].k == 1


def test_bk1_deterministic_reaches_pareto_set():
    spec = get_problem("bk1")
    for x0 in multi_start(spec, 10, seed=1):
        orc = StochasticOracle(spec.instance, 0.0)
        traj = solve(spec.instance, orc, x0, 100, OuterSchedule.fixed(0.04),
                     InnerSchedule.constant(0.01), InnerBudgetRule.explicit(300))
        assert bk1_front_distance(traj.terminal) <= 0.2


def test_draw_bookkeeping():
    prob = get_problem("lov1").instance
    orc = StochasticOracle(prob, 0.1, seed=2)
    traj = solve(prob, orc, np.array([1.0, 1.0]), 6, OuterSchedule.varying(0.5),
                 InnerSchedule.constant(0.01), InnerBudgetRule("per_iter_square"))
    assert traj.draws == orc.draws == sum((k + 1) ** 2 for k in range(6))
    assert [row.S for row in traj.rows[:-1]] == [(k + 1) ** 2 for k in range(6)]


def test_exact_direction_reproduces_mgda():
    rng = np.random.default_rng(3)
    for _ in range(10):
        c = rng.normal(size=(3, 2))

        def f(x, c=c):
            return np.sum((x - c) ** 2, axis=1)

        def g(x, c=c):
            return 2 * (x - c)

        prob = ProblemInstance("q3", 3, 2, np.full(2, -3.0), np.full(2, 3.0), f, g)
        x0 = rng.uniform(-3, 3, 2)
        traj = solve(prob, StochasticOracle(prob, 0.0), x0, 20, OuterSchedule.fixed(0.1),
                     InnerSchedule.constant(0.1), InnerBudgetRule.explicit(1),
                     direction_fn=lambda orc, x, S: mgda_minnorm(orc.sample(x)).d)
        x = x0.copy()
        for row in traj.rows[:-1]:
            np.testing.assert_allclose(row.x, x, rtol=0, atol=1e-10)
            x = mgda_step(prob.gradient(x), x, 0.1)
        np.testing.assert_allclose(traj.terminal, x, rtol=0, atol=1e-10)


def test_divergence_keeps_valid_prefix():
    prob = linear_problem(np.array([[1.0, 0.0], [0.0, 1.0]]))
    traj_calls = []

    def blow_up(orc, x, S):
        traj_calls.append(S)
        return np.array([np.inf, 0.0]) if len(traj_calls) == 3 else np.array([-1.0, 0.0])

    with pytest.raises(DivergenceError) as exc:
        solve(prob, StochasticOracle(prob), np.zeros(2), 10, OuterSchedule.fixed(0.1),
              InnerSchedule.constant(0.1), InnerBudgetRule.explicit(1), direction_fn=blow_up)
    assert len(exc.value.trajectory.rows) == 3


def test_preference_mu_zero_is_bitwise_identical():
    spec = get_problem("bk1")
    x0 = multi_start(spec, 1, seed=5)[0]
    args = (OuterSchedule.fixed(0.04), InnerSchedule.constant(0.01), InnerBudgetRule.explicit(300))
    a = solve(spec.instance, StochasticOracle(spec.instance, 0.5, seed=4), x0, 10, *args)
    b = solve_with_preference(spec.instance, StochasticOracle(spec.instance, 0.5, seed=4), x0, 10,
                              PreferenceSpec([0.3, 0.7], 0.0), *args)
    for ra, rb in zip(a.rows, b.rows):
        assert ra.x.tobytes() == rb.x.tobytes()
        assert ra.F.tobytes() == rb.F.tobytes()


def test_preference_saddle_on_identical_rows():
    g = np.array([1.0, 0.0])
    prob = linear_problem(np.vstack([g, g]))
    orc = StochasticOracle(prob, 0.0, gradient_bound=1.0)
    pref = PreferenceSpec([0.5, 0.5], 1.0, C_g=1.0)
    assert pref.radius(1.0) == pytest.approx(2.0)
    traj = solve_with_preference(prob, orc, np.zeros(2), 1, pref, OuterSchedule.fixed(1.0),
                                 InnerSchedule.constant(0.05), InnerBudgetRule.explicit(4000))
    d = traj.rows[1].x - traj.rows[0].x
    np.testing.assert_allclose(d, [-2.0, 0.0], atol=1e-2)


def test_preference_pulls_towards_weighted_objective():
    G = np.array([[1.0, 0.0], [0.0, 1.0]])
    prob = linear_problem(G)
    angles = []
    for mu in (0.0, 1.0, 4.0, 16.0):
        orc = StochasticOracle(prob, 0.0)
        traj = solve_with_preference(prob, orc, np.zeros(2), 1, PreferenceSpec([1.0, 0.0], mu),
                                     OuterSchedule.fixed(1.0), InnerSchedule.constant(0.02),
                                     InnerBudgetRule.explicit(5000))
        d = traj.terminal
        angles.append(math.acos(np.clip(-d[0] / np.linalg.norm(d), -1, 1)))
    assert all(b < a for a, b in zip(angles, angles[1:]))


def test_default_inner_schedule_constants():
    prob = get_problem("bk1").instance
    orc = StochasticOracle(prob, 0.1, gradient_bound=2.0)
    s = default_inner_schedule(orc, "fixed", 1.0)
    assert s.m_star == pytest.approx(compute_m_star(2, 2.0, orc.delta))
    p = default_inner_schedule(orc, "varying", 1.0, PreferenceSpec([0.5, 0.5], 2.0, C_g=3.0))
    assert p.m_star == pytest.approx(compute_m0_star(2, 2.0, orc.delta, 2.0, 3.0))


def test_stationarity_tracking():
    spec = get_problem("bk1")
    traj = solve(spec.instance, StochasticOracle(spec.instance, 0.0), np.array([8.0, -3.0]), 50,
                 OuterSchedule.fixed(0.04), InnerSchedule.constant(0.01), InnerBudgetRule.explicit(300),
                 track_stationarity=True)
    stat = [row.stationarity for row in traj.rows]
    assert stat[-1] < 0.2 * stat[0]
