"""Outer multi-gradient loop, step-size and budget rules, and the preference variant."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .baselines import mgda_minnorm
from .core import as_decision_vector, as_gradient_matrix
from .geometry import check_simplex
from .inner_smd import InnerSchedule, compute_m0_star, compute_m_star, run_inner


class DivergenceError(RuntimeError):
    """A non-finite iterate was produced; ``trajectory`` holds the valid prefix."""

    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class OuterSchedule:
    """``fixed``: ``alpha_k = value``; ``varying``: ``alpha_k = value / (k + 1)``."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed", "varying"):
            raise ValueError(f"unknown outer schedule {self.kind!r}")
        if not self.value >= 0 or not math.isfinite(self.value):
            raise ValueError("outer step parameter must be finite and >= 0")

    @classmethod
    def fixed(cls, alpha):
        return cls("fixed", alpha)

    @classmethod
    def varying(cls, rho_step):
        return cls("varying", rho_step)


def outer_step_size(schedule, k):
    if k < 0:
        raise IndexError("outer iteration index must be >= 0")
    if schedule.kind == "fixed":
        return float(schedule.value)
    return schedule.value / (k + 1)


@dataclass(frozen=True)
class InnerBudgetRule:
    """``global_square``: ``S = (K+1)^2``; ``per_iter_square``: ``S = (k+1)^2``; ``explicit``: ``S``."""

    kind: str
    S: int = 0

    def __post_init__(self):
        if self.kind not in ("global_square", "per_iter_square", "explicit"):
            raise ValueError(f"unknown inner budget rule {self.kind!r}")
        if self.kind == "explicit" and self.S < 1:
            raise ValueError("explicit inner budget must be >= 1")

    @classmethod
    def explicit(cls, S):
        return cls("explicit", int(S))


def inner_budget(rule, k, K):
    if rule.kind == "global_square":
        return (K + 1) ** 2
    if rule.kind == "per_iter_square":
        return (k + 1) ** 2
    return rule.S


@dataclass(frozen=True)
class PreferenceSpec:
    w: np.ndarray
    mu: float
    C_g: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "w", check_simplex(np.asarray(self.w, dtype=float), tol=1e-9))
        if self.mu < 0:
            raise ValueError("preference strength mu must be >= 0")
        if self.C_g is not None and self.C_g <= 0:
            raise ValueError("preference gradient bound C_g must be positive")

    def radius(self, C_f):
        """Ball radius ``sqrt(2 C_f^2 + 2 mu^2 C_g^2)``; plain ``C_f`` when ``mu = 0``."""
        if self.mu == 0:
            return C_f
        C_g = C_f if self.C_g is None else self.C_g
        return math.sqrt(2 * C_f**2 + 2 * self.mu**2 * C_g**2)


@dataclass
class TrajectoryRow:
    """State at outer iteration ``k`` and the step taken from it.

    The terminal row (``k = K``) has ``alpha = 0``, ``S = 0`` and ``d_norm = 0``.
    """

    k: int
    x: np.ndarray
    F: np.ndarray
    alpha: float
    S: int
    d_norm: float
    stationarity: Optional[float] = None


@dataclass
class Trajectory:
    rows: List[TrajectoryRow] = field(default_factory=list)
    draws: int = 0

    @property
    def terminal(self):
        return self.rows[-1].x

    def __len__(self):
        return len(self.rows)


def pareto_stationarity_measure(G):
    """``||d*||`` of the exact min-norm direction; zero iff the point is Pareto stationary."""
    G = as_gradient_matrix(G)
    if not np.any(G):
        return 0.0
    return float(np.linalg.norm(mgda_minnorm(G).d))


def default_inner_schedule(oracle, kind="fixed", theta=1.0, preference=None):
    """Inner schedule with ``M*`` (or ``M_{0,*}``) computed from the oracle's constants."""
    C_f, delta = oracle.gradient_bound, oracle.delta
    if preference is None or preference.mu == 0:
        m_star = compute_m_star(oracle.m, C_f, delta)
    else:
        C_g = C_f if preference.C_g is None else preference.C_g
        m_star = compute_m0_star(oracle.m, C_f, delta, preference.mu, C_g)
    return InnerSchedule(kind, theta, m_star)


def _run(problem, oracle, x0, K, outer, inner, budget, r, radius, preference,
         track_stationarity, direction_fn):
    if K < 1:
        raise ValueError("number of outer iterations K must be >= 1")
    x = as_decision_vector(x0, problem.n).copy()
    traj = Trajectory()
    start_draws = oracle.draws
    for k in range(K):
        alpha = outer_step_size(outer, k)
        S = inner_budget(budget, k, K)
        G_true = problem.gradient(x) if track_stationarity else None
        if direction_fn is not None:
            d = np.asarray(direction_fn(oracle, x, S), dtype=float)
        else:
            d = run_inner(oracle, x, inner, S, r, radius=radius, preference=preference).d_avg
        traj.rows.append(TrajectoryRow(
            k, x.copy(), np.asarray(problem.evaluate(x), dtype=float), alpha, S,
            float(np.linalg.norm(d)),
            pareto_stationarity_measure(G_true) if track_stationarity else None,
        ))
        x_next = x + alpha * d
        if not np.all(np.isfinite(x_next)):
            traj.draws = oracle.draws - start_draws
            raise DivergenceError(f"non-finite iterate at outer step {k + 1}", traj)
        x = x_next
    F = np.asarray(problem.evaluate(x), dtype=float)
    stat = pareto_stationarity_measure(problem.gradient(x)) if track_stationarity else None
    traj.rows.append(TrajectoryRow(K, x.copy(), F, 0.0, 0, 0.0, stat))
    traj.draws = oracle.draws - start_draws
    if not np.all(np.isfinite(F)):
        raise DivergenceError(f"non-finite objective at outer step {K}", traj)
    return traj


def solve(problem, oracle, x0, K, outer, inner, budget, r=0.5, radius=None,
          track_stationarity=False, direction_fn: Optional[Callable] = None):
    """Multi-gradient stochastic mirror descent.

    For ``k = 0..K-1`` the inner solver returns the averaged direction
    ``d_k`` (which approximates ``-sum lam_i grad f_i``) and the iterate moves
    to ``x_{k+1} = x_k + alpha_k d_k``.

    ``direction_fn(oracle, x, S)``, when given, replaces the inner solver; it
    exists so tests can substitute an exact direction.
    """
    return _run(problem, oracle, x0, K, outer, inner, budget, r, radius, None,
                track_stationarity, direction_fn)


def solve_with_preference(problem, oracle, x0, K, pref, outer, inner, budget, r=0.5,
                          track_stationarity=False):
    """MSMD for the preference-regularized subproblem.

    The ``d``-gradient gains ``mu * w^T G(xi)`` and the ball radius grows to
    ``sqrt(2 C_f^2 + 2 mu^2 C_g^2)``.  With ``mu = 0`` this is exactly
    :func:`solve`.
    """
    if pref.w.shape != (problem.m,):
        raise ValueError(f"preference vector has length {pref.w.size}, expected {problem.m}")
    radius = pref.radius(oracle.gradient_bound)
    preference = None if pref.mu == 0 else (pref.w, pref.mu)
    return _run(problem, oracle, x0, K, outer, inner, budget, r, radius, preference,
                track_stationarity, None)
