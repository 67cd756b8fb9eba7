"""Comparison solvers: MGDA min-norm, PCGrad, SMG, CR-MOGM, SDMGrad-lite and
weighted-sum SGD/Adam/RMSProp.

Every ``*_step`` function returns the next decision vector ``x + alpha * d``
for its own descent direction ``d``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import as_gradient_matrix, combo
from .geometry import check_simplex, uniform_weights

FW_MAX_ITERS = 500
FW_TOL = 1e-8

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
RMSPROP_DECAY = 0.99
RMSPROP_EPS = 1e-8


@dataclass
class MinNormSolution:
    lam: np.ndarray
    d: np.ndarray
    value: float
    converged: bool = True
    iterations: int = 0


def _two_point_weight(g1, g2):
    """Weight on ``g1`` minimizing ``||a g1 + (1 - a) g2||``."""
    diff = g1 - g2
    denom = float(diff @ diff)
    if denom == 0.0:
        return 0.5
    return float(np.clip((g2 - g1) @ g2 / denom, 0.0, 1.0))


POLISH_MAX_M = 10


def _solve_on_support(M, idx):
    k = idx.size
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = M[np.ix_(idx, idx)]
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    w = sol[:k]
    if not np.all(np.isfinite(w)) or np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
        return None
    lam = np.zeros(M.shape[0])
    lam[idx] = np.clip(w, 0.0, None)
    return lam / lam.sum()


def _polish(M, lam):
    """Exact minimizer of ``lam^T M lam`` over the simplex by support enumeration.

    Every support's affine-hull minimizer is tried and the best feasible one
    kept; the Frank-Wolfe iterate is the fallback.
    """
    m = M.shape[0]
    if m > POLISH_MAX_M:
        return lam
    best, best_val = None, np.inf
    for size in range(1, m + 1):
        for idx in itertools.combinations(range(m), size):
            cand = _solve_on_support(M, np.array(idx))
            if cand is None:
                continue
            val = float(cand @ M @ cand)
            if val < best_val:
                best, best_val = cand, val
    # the optimal support is always among the candidates; keep the iterate only
    # if every solve was rejected
    if best is None or best_val > float(lam @ M @ lam) + 1e-12:
        return lam
    return best


def mgda_minnorm(G, max_fw_iters=FW_MAX_ITERS, tol=FW_TOL):
    """Min-norm element of the convex hull of the rows of ``G``.

    Two rows use the closed form; three or more use Frank-Wolfe with exact
    line search on the Gram matrix, stopped at duality gap ``tol``, followed
    by an exact support-enumeration polish (``m <= 10``).
    """
    G = as_gradient_matrix(G)
    m = G.shape[0]
    if m == 1:
        lam = np.ones(1)
        iters, converged = 0, True
    elif m == 2:
        a = _two_point_weight(G[0], G[1])
        lam = np.array([a, 1.0 - a])
        iters, converged = 0, True
    else:
        M = G @ G.T
        lam = uniform_weights(m)
        converged = False
        iters = 0
        for iters in range(1, max_fw_iters + 1):
            grad = M @ lam
            j = int(np.argmin(grad))
            gap = float(lam @ grad - grad[j])
            if gap <= tol:
                converged = True
                break
            # exact line search towards vertex j
            v1v1 = float(lam @ M @ lam)
            v1v2 = float(grad[j])
            v2v2 = float(M[j, j])
            denom = v1v1 - 2 * v1v2 + v2v2
            step = 1.0 if denom <= 0 else float(np.clip((v1v1 - v1v2) / denom, 0.0, 1.0))
            lam = (1 - step) * lam
            lam[j] += step
        lam = _polish(M, lam)
        grad = M @ lam
        converged = converged or float(lam @ grad - grad.min()) <= tol
    v = combo(G, lam)
    return MinNormSolution(lam=lam, d=-v, value=float(v @ v), converged=converged, iterations=iters)


def mgda_step(G, x, alpha):
    """Deterministic MGDA update ``x + alpha d`` with ``d`` the min-norm direction of ``G``."""
    return np.asarray(x, dtype=float) + alpha * mgda_minnorm(G).d


def pcgrad_direction(G, rng):
    """Negated sum of PCGrad-projected task gradients.

    Each task gradient is projected off every other task gradient it conflicts
    with (negative inner product), visiting the others in a random order.
    Pairs where the other gradient is zero are skipped.
    """
    G = as_gradient_matrix(G)
    m = G.shape[0]
    sq = np.einsum("ij,ij->i", G, G)
    total = np.zeros(G.shape[1])
    for i in range(m):
        v = G[i].copy()
        others = np.array([j for j in range(m) if j != i], dtype=int)
        for j in rng.permutation(others) if others.size else others:
            dot = float(v @ G[j])
            if dot < 0 and sq[j] > 0:
                v -= dot / sq[j] * G[j]
        total += v
    return -total


def pcgrad_step(oracle, x, alpha, rng):
    return np.asarray(x, dtype=float) + alpha * pcgrad_direction(oracle.sample(x), rng)


def smg_step(oracle, x, alpha):
    """Stochastic multi-gradient step: min-norm weights of one sampled matrix."""
    G = oracle.sample(x)
    sol = mgda_minnorm(G)
    return np.asarray(x, dtype=float) - alpha * combo(G, sol.lam)


@dataclass
class CrMogmState:
    lam_tracked: np.ndarray
    beta: float = 0.9

    def __post_init__(self):
        check_simplex(self.lam_tracked)
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")

    @classmethod
    def initial(cls, m, beta=0.9):
        return cls(uniform_weights(m), beta)


def cr_mogm_blend(lam_prev, lam_new, beta):
    if beta == 0.0:
        return np.array(lam_new, dtype=float)
    return beta * np.asarray(lam_prev) + (1.0 - beta) * np.asarray(lam_new)


def cr_mogm_step(state, oracle, x, alpha):
    """Correlation-reduced step: blend the sampled min-norm weights into the tracked ones."""
    G = oracle.sample(x)
    lam = cr_mogm_blend(state.lam_tracked, mgda_minnorm(G).lam, state.beta)
    x_next = np.asarray(x, dtype=float) - alpha * combo(G, lam)
    return CrMogmState(lam, state.beta), x_next


def simplex_projection(v):
    return _kernels.simplex_projection(np.asarray(v, dtype=float))


def sdmgrad_lite_step(oracle, x, alpha, S, gamma, lam0=None):
    """Reduced SDMGrad-style step with three independent draws per inner step.

    Returns ``(x_next, lam)``.  The weights run ``S`` projected SGD steps
    ``lam <- Pi(lam - gamma G1 G2^T lam)``; the direction averages
    ``-G3^T lam`` over the inner steps.
    """
    if S < 1:
        raise ValueError("inner budget S must be >= 1")
    x = np.asarray(x, dtype=float)
    lam0 = uniform_weights(oracle.m) if lam0 is None else np.asarray(lam0, dtype=float)
    samples = oracle.sample_block(x, 3 * S).reshape(S, 3, oracle.m, oracle.n)
    lam, direction = _kernels.sdmgrad_lite_loop(np.ascontiguousarray(samples), float(gamma), lam0)
    return x + alpha * direction, lam


@dataclass
class WeightedSumState:
    """Optimizer state for the equal-weight scalarization ``(1/m) sum f_i``."""

    kind: str
    t: int = 0
    m1: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kind not in ("sgd", "adam", "rmsprop"):
            raise ValueError(f"unknown weighted-sum optimizer {self.kind!r}")


def weighted_sum_step(kind, state, oracle, x, alpha):
    """One SGD / Adam / RMSProp step on the mean objective using one sampled matrix."""
    if state is None:
        state = WeightedSumState(kind)
    if state.kind != kind:
        raise ValueError(f"state is for {state.kind!r}, not {kind!r}")
    x = np.asarray(x, dtype=float)
    g = oracle.sample(x).mean(axis=0)
    return weighted_sum_update(state, x, g, alpha)


def weighted_sum_update(state, x, g, alpha):
    kind = state.kind
    if kind == "sgd":
        return WeightedSumState(kind, state.t + 1), x - alpha * g
    m1 = np.zeros_like(g) if state.m1 is None else state.m1
    m2 = np.zeros_like(g) if state.m2 is None else state.m2
    t = state.t + 1
    if kind == "adam":
        b1, b2 = ADAM_BETAS
        m1 = b1 * m1 + (1 - b1) * g
        m2 = b2 * m2 + (1 - b2) * g * g
        m_hat = m1 / (1 - b1**t)
        v_hat = m2 / (1 - b2**t)
        return WeightedSumState(kind, t, m1, m2), x - alpha * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    m2 = RMSPROP_DECAY * m2 + (1 - RMSPROP_DECAY) * g * g
    return WeightedSumState(kind, t, m1, m2), x - alpha * g / (np.sqrt(m2) + RMSPROP_EPS)
