"""Stochastic mirror descent on the direction-finding saddle problem.

At a fixed outer iterate ``x`` the common descent direction solves

    min_{||d|| <= R}  max_{lam in simplex}  <G lam, d> + 0.5 ||d||^2

with ``G`` the (expected) gradient matrix.  Each inner step takes one
stochastic gradient sample, a projected descent step in ``d`` and an
exponentiated ascent step in ``lam``; the output is the step-size weighted
average of the iterates ``z_s``, ``s = P..S`` with ``P = ceil(r S)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import DimensionError, OracleError, as_decision_vector, combo
from .geometry import LAMBDA_FLOOR, uniform_weights

FIXED = "fixed"
VARYING = "varying"
CONSTANT = "constant"


@dataclass(frozen=True)
class InnerSchedule:
    """Inner step sizes ``gamma_s`` for ``s = 1..S``.

    ``fixed``: ``theta / (M* sqrt(S))``; ``varying``: ``theta / (M* sqrt(s))``;
    ``constant``: ``theta`` for every step (explicit override, ``m_star`` unused).
    """

    kind: str
    theta: float = 1.0
    m_star: float = 1.0

    def __post_init__(self):
        if self.kind not in (FIXED, VARYING, CONSTANT):
            raise ValueError(f"unknown inner schedule {self.kind!r}")
        if not (self.theta > 0 and self.m_star > 0):
            raise ValueError("theta and M* must be positive")

    @classmethod
    def fixed(cls, theta, m_star):
        return cls(FIXED, theta, m_star)

    @classmethod
    def varying(cls, theta, m_star):
        return cls(VARYING, theta, m_star)

    @classmethod
    def constant(cls, gamma):
        return cls(CONSTANT, gamma, 1.0)

    def step_size(self, s, S):
        if s < 1 or s > S:
            raise IndexError(f"inner step index s={s} outside 1..{S}")
        return inner_step_size(self, s, S)

    def step_sizes(self, S):
        s = np.arange(1, S + 1, dtype=float)
        if self.kind == FIXED:
            return np.full(S, self.theta / (self.m_star * math.sqrt(S)))
        if self.kind == VARYING:
            return self.theta / (self.m_star * np.sqrt(s))
        return np.full(S, float(self.theta))


def inner_step_size(schedule, s, S):
    if s < 1:
        raise IndexError("inner steps are 1-based; s must be >= 1")
    if schedule.kind == FIXED:
        return schedule.theta / (schedule.m_star * math.sqrt(S))
    if schedule.kind == VARYING:
        return schedule.theta / (schedule.m_star * math.sqrt(s))
    return float(schedule.theta)


def compute_m_star(m, C_f, delta):
    """Constant ``M*`` bounding the dual norm of the stochastic saddle gradient."""
    if m < 2 or C_f <= 0 or delta < 0:
        raise ValueError("need m >= 2, C_f > 0, delta >= 0")
    lnm = math.log(m)
    sq = (2 + lnm) * m**2 * C_f**4 + (0.5 + lnm) * m**2 * C_f**2 * delta**2
    return math.sqrt(sq)


def compute_m0_star(m, C_f, delta, mu, C_g, delta0=None):
    """Preference-variant constant ``M_{0,*}``; ``delta0`` defaults to ``delta``."""
    if m < 2 or C_f <= 0 or delta < 0 or mu < 0 or C_g <= 0:
        raise ValueError("need m >= 2, C_f > 0, C_g > 0, delta >= 0, mu >= 0")
    delta0 = delta if delta0 is None else delta0
    lnm = math.log(m)
    big = C_f**2 + mu**2 * C_g**2
    sq = 9 * big**2 + 2 * (m * lnm * C_f**2 + delta**2 + mu**2 * delta0**2 + m * lnm * delta**2) * big
    return math.sqrt(sq)


def tail_start(S, r):
    """``P = ceil(r S)``, rounded defensively against binary fractions like ``0.1 * 30``."""
    if not 0 < r < 1:
        raise ValueError(f"averaging ratio r must lie in (0, 1), got {r}")
    return max(1, math.ceil(round(r * S, 9)))


@dataclass
class InnerState:
    d: np.ndarray
    lam: np.ndarray
    radius: float

    @classmethod
    def initial(cls, m, n, radius):
        return cls(np.zeros(n), uniform_weights(m), float(radius))


@dataclass
class InnerResult:
    d_avg: np.ndarray
    lam_avg: np.ndarray
    S: int
    P: int
    radius: float
    trace: Optional[np.ndarray] = None


def subproblem_gradient(G, d, lam, g0=None, mu=0.0):
    """Partial gradients of ``<G lam + mu g0, d> + 0.5 ||d||^2``.

    Returns ``(g_d, g_lam)`` with ``g_d = G^T lam + mu g0 + d`` and
    ``g_lam = G d``; the weights ascend along ``g_lam``.
    """
    G = np.asarray(G, dtype=float)
    d = np.asarray(d, dtype=float)
    if G.ndim != 2 or G.shape[1] != d.shape[0]:
        raise DimensionError(f"gradient matrix {G.shape} does not match direction length {d.shape[0]}")
    g_d = combo(G, lam)
    if g0 is not None and mu != 0.0:
        g_d = g_d + mu * np.asarray(g0, dtype=float)
    return g_d + d, G @ d


def smd_step(state, G, gamma, preference=None):
    """One mirror step from ``state`` with sampled matrix ``G`` and step ``gamma``.

    ``preference`` is ``(w, mu)``; the preference gradient ``w^T G`` is taken
    from the same sample.
    """
    if gamma <= 0:
        raise ValueError("inner step size must be positive")
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape != (state.lam.shape[0], state.d.shape[0]):
        raise DimensionError(f"gradient matrix {G.shape} does not match state ({state.lam.shape[0]}, {state.d.shape[0]})")
    g_d = state.lam @ G + state.d
    if preference is not None and preference[1] != 0.0:
        w, mu = preference
        g_d = g_d + mu * (np.asarray(w, dtype=float) @ G)
    # same arithmetic as euclidean_prox / entropy_prox without their input checks
    d = state.d - gamma * g_d
    norm = math.sqrt(float(d @ d))
    if norm > state.radius:
        d = d * (state.radius / norm)
    expo = gamma * (G @ state.d)
    lam = state.lam * np.exp(expo - expo.max())
    lam = np.maximum(lam / lam.sum(), LAMBDA_FLOOR)
    return InnerState(d, lam, state.radius)


def run_inner(oracle, x, schedule, S, r=0.5, radius=None, preference=None, trace=False):
    """Solve the direction subproblem at ``x`` with ``S`` single-sample mirror steps.

    Parameters
    ----------
    oracle : StochasticOracle
        Source of gradient samples; exactly ``S`` draws are taken.
    schedule : InnerSchedule
    S : int
        Number of inner iterations.
    r : float
        Averaging starts at ``P = ceil(r S)``.
    radius : float, optional
        Ball radius for ``d``; defaults to the oracle's gradient bound ``C_f``.
    preference : tuple, optional
        ``(w, mu)`` for the preference-regularized subproblem.
    trace : bool
        Record ``||d_s||`` for every step.

    Returns
    -------
    InnerResult
    """
    if S < 1:
        raise ValueError("inner budget S must be >= 1")
    x = as_decision_vector(x, oracle.n)
    P = tail_start(S, r)
    radius = oracle.gradient_bound if radius is None else float(radius)
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    try:
        samples = oracle.sample_block(x, S)
    except OracleError:
        raise
    except Exception as exc:
        raise OracleError(f"gradient oracle failed: {exc}", iteration=1) from exc
    samples = np.ascontiguousarray(samples, dtype=float)
    bad = ~np.isfinite(samples).reshape(S, -1).all(axis=1)
    if bad.any():
        raise OracleError("gradient oracle returned non-finite values", iteration=int(np.argmax(bad)) + 1)
    m = samples.shape[1]
    if preference is None:
        w, mu = np.zeros(m), 0.0
    else:
        w, mu = np.asarray(preference[0], dtype=float), float(preference[1])
        if w.shape != (m,):
            raise DimensionError(f"preference vector has length {w.shape}, expected {m}")
    gammas = schedule.step_sizes(S)
    tr = np.zeros(S) if trace else np.zeros(0)
    init = InnerState.initial(m, oracle.n, radius)
    d_avg, lam_avg = _kernels.smd_tail_average(
        samples, gammas, radius, w, mu, P, init.d, init.lam, LAMBDA_FLOOR, tr
    )
    return InnerResult(d_avg, lam_avg, S, P, radius, tr if trace else None)


def run_inner_reference(samples, schedule, r=0.5, radius=1.0, preference=None):
    """Pure-numpy counterpart of :func:`run_inner` on a given sample block."""
    S, m, n = samples.shape
    P = tail_start(S, r)
    state = InnerState.initial(m, n, radius)
    gammas = schedule.step_sizes(S)
    d_acc = np.zeros(n)
    lam_acc = np.zeros(m)
    for s in range(S):
        state = smd_step(state, samples[s], gammas[s], preference)
        if s + 1 >= P:
            d_acc += gammas[s] * state.d
            lam_acc += gammas[s] * state.lam
    total = gammas[P - 1:].sum()
    return InnerResult(d_acc / total, lam_acc / total, S, P, radius)
