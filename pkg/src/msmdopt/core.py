"""Problem instances and the stochastic gradient oracle.

Conventions used throughout the package:

* a decision vector ``x`` is a float array of shape ``(n,)``;
* an objective vector ``F(x)`` is a float array of shape ``(m,)``;
* a gradient matrix ``G`` has shape ``(m, n)`` and row ``i`` is the gradient
  of objective ``i``.  The weighted combination ``sum_i lam_i * G[i]`` is
  computed by :func:`combo`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc


class DimensionError(ValueError):
    """Raised when array shapes do not agree."""


class BoundaryError(ValueError):
    """Raised when a point is too close to the box boundary for a stencil."""


class OracleError(RuntimeError):
    """Raised when a gradient draw fails; carries the inner iteration index."""

    def __init__(self, message, iteration=None):
        super().__init__(message if iteration is None else f"{message} (inner iteration {iteration})")
        self.iteration = iteration


def as_decision_vector(x, n=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DimensionError(f"decision vector must be 1-D and non-empty, got shape {x.shape}")
    if n is not None and x.size != n:
        raise DimensionError(f"decision vector has length {x.size}, expected n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("decision vector has non-finite entries")
    return x


def as_gradient_matrix(G, m=None, n=None):
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise DimensionError(f"gradient matrix must be 2-D, got shape {G.shape}")
    if (m is not None and G.shape[0] != m) or (n is not None and G.shape[1] != n):
        raise DimensionError(f"gradient matrix has shape {G.shape}, expected ({m}, {n})")
    if not np.all(np.isfinite(G)):
        raise ValueError("gradient matrix has non-finite entries")
    return G


def combo(G, lam):
    """Return ``sum_i lam[i] * G[i]``, an ``n``-vector.

    >>> combo(np.array([[1., 2.], [3., 4.]]), np.array([0.25, 0.75]))
    array([2.5, 3.5])
    """
    G = np.asarray(G, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if G.ndim != 2 or lam.ndim != 1 or G.shape[0] != lam.shape[0]:
        raise DimensionError(
            f"gradient matrix has {G.shape[0] if G.ndim == 2 else G.shape} rows "
            f"but weight vector has length {lam.shape[0] if lam.ndim == 1 else lam.shape}"
        )
    return lam @ G


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A differentiable vector objective ``F: R^n -> R^m`` with a box.

    The box is used for initialization, noise scaling and the gradient-bound
    probe only; iterates are allowed to leave it.

    Attributes
    ----------
    evaluate, gradient : callable
        Map a decision vector to the objective vector ``(m,)`` and the
        gradient matrix ``(m, n)``.
    known_pareto_set : callable, optional
        Maps ``t`` in ``[0, 1]`` to a Pareto optimal decision vector.
    gradient_bound : float, optional
        Configured value of ``C_f``.  When missing, it is estimated by
        :attr:`estimated_gradient_bound`.
    """

    name: str
    m: int
    n: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    evaluate: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    known_pareto_set: Optional[Callable[[float], np.ndarray]] = None
    gradient_bound: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lb = np.asarray(self.lower_bounds, dtype=float)
        ub = np.asarray(self.upper_bounds, dtype=float)
        if lb.shape != (self.n,) or ub.shape != (self.n,):
            raise DimensionError(f"bounds must have shape ({self.n},)")
        if not np.all(lb < ub):
            raise ValueError("lower bounds must be strictly below upper bounds")
        object.__setattr__(self, "lower_bounds", lb)
        object.__setattr__(self, "upper_bounds", ub)

    @property
    def ranges(self):
        return self.upper_bounds - self.lower_bounds

    @cached_property
    def estimated_gradient_bound(self):
        return estimate_gradient_bound(self)

    @property
    def C_f(self):
        if self.gradient_bound is not None:
            return float(self.gradient_bound)
        return self.estimated_gradient_bound


def estimate_gradient_bound(problem, n_points=1000, safety=1.5, seed=0):
    """Largest per-objective gradient norm over a Latin-hypercube probe of the box, times ``safety``."""
    sampler = qmc.LatinHypercube(d=problem.n, seed=seed)
    pts = qmc.scale(sampler.random(n_points), problem.lower_bounds, problem.upper_bounds)
    worst = 0.0
    for x in pts:
        G = problem.gradient(x)
        worst = max(worst, float(np.max(np.linalg.norm(G, axis=1))))
    if worst == 0.0:
        # constant objectives: any positive radius contains the zero direction
        return 1.0
    return safety * worst


def linear_problem(G, name="linear", lower=-1.0, upper=1.0):
    """Problem ``F(x) = G x`` whose gradient is the constant matrix ``G``."""
    G = as_gradient_matrix(G)
    G = G.copy()
    G.setflags(write=False)
    m, n = G.shape
    return ProblemInstance(
        name=name,
        m=m,
        n=n,
        lower_bounds=np.full(n, float(lower)),
        upper_bounds=np.full(n, float(upper)),
        evaluate=lambda x: G @ np.asarray(x, dtype=float),
        gradient=lambda x: G.copy(),
        gradient_bound=max(float(np.max(np.linalg.norm(G, axis=1))), 1e-12),
    )


def finite_difference_gradient(problem, x, h=1e-6):
    """Central-difference gradient matrix of ``problem`` at ``x``.

    Only meant as a test oracle for the analytic gradients.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    x = as_decision_vector(x, problem.n)
    if np.any(x - h < problem.lower_bounds) or np.any(x + h > problem.upper_bounds):
        raise BoundaryError(f"x must lie inside the box by a margin of at least h={h}")
    G = np.empty((problem.m, problem.n))
    for j in range(problem.n):
        e = np.zeros(problem.n)
        e[j] = h
        G[:, j] = (np.asarray(problem.evaluate(x + e)) - np.asarray(problem.evaluate(x - e))) / (2 * h)
    return G


class StochasticOracle:
    """Unbiased gradient sampler with additive Gaussian noise.

    Each draw returns ``gradient(x) + N`` where ``N[i, j] ~ Normal(0, sigma_j^2)``
    independently, with ``sigma_j = noise_ratio * (ub_j - lb_j)``.  With a zero
    noise ratio the exact gradient is returned and no random numbers are used.

    One oracle belongs to one run: it owns a ``numpy`` generator seeded from a
    64-bit integer (or a ``SeedSequence``) and counts its draws in ``draws``.
    """

    def __init__(self, problem, noise_ratio=0.0, seed=0, gradient_bound=None):
        if noise_ratio < 0 or not np.isfinite(noise_ratio):
            raise ValueError(f"noise ratio must be finite and >= 0, got {noise_ratio}")
        self.problem = problem
        self.noise_ratio = float(noise_ratio)
        self.sigma = self.noise_ratio * problem.ranges
        self.rng = np.random.default_rng(seed)
        self._gradient_bound = gradient_bound
        self.draws = 0

    @property
    def m(self):
        return self.problem.m

    @property
    def n(self):
        return self.problem.n

    @property
    def delta(self):
        """Per-objective noise bound ``||sigma||_2``."""
        return float(np.linalg.norm(self.sigma))

    @property
    def gradient_bound(self):
        if self._gradient_bound is not None:
            return float(self._gradient_bound)
        return self.problem.C_f

    def true_gradient(self, x):
        return as_gradient_matrix(self.problem.gradient(x), self.m, self.n)

    def sample(self, x):
        """One stochastic gradient matrix at ``x``."""
        G = self.true_gradient(x)
        self.draws += 1
        if self.noise_ratio == 0.0:
            return G
        return G + self.rng.standard_normal((self.m, self.n)) * self.sigma

    def sample_block(self, x, count):
        """``count`` independent draws at a fixed ``x``, shape ``(count, m, n)``.

        Equal, value for value, to ``count`` successive calls of :meth:`sample`.
        """
        G = self.true_gradient(x)
        self.draws += count
        if self.noise_ratio == 0.0:
            return np.broadcast_to(G, (count, self.m, self.n)).copy()
        return G + self.rng.standard_normal((count, self.m, self.n)) * self.sigma
