"""Distance-generating functions, prox-mappings and the product norm on ``(d, lam)``.

The direction ``d`` lives in the Euclidean ball of radius ``R`` with
``omega_d(x) = 0.5 ||x||^2``; the weights ``lam`` live on the probability
simplex with the entropy ``omega_lam(x) = sum x_i ln x_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DimensionError

LAMBDA_FLOOR = 1e-300
SIMPLEX_TOL = 1e-12


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a Bregman function."""


def check_simplex(lam, tol=SIMPLEX_TOL):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1 or lam.size < 1:
        raise DimensionError(f"weights must be a non-empty 1-D array, got shape {lam.shape}")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > tol:
        raise DomainError(f"weights are not on the simplex (min={lam.min()}, sum={lam.sum()})")
    return lam


def uniform_weights(m):
    return np.full(m, 1.0 / m)


def project_ball(v, radius):
    """Radial projection onto ``{d : ||d||_2 <= radius}``."""
    norm = np.linalg.norm(v)
    if norm > radius:
        return v * (radius / norm)
    return v


def euclidean_prox(d, step, radius):
    """``argmin_{||u|| <= radius} <step, u - d> + 0.5 ||u - d||^2``, i.e. ``Pi(d - step)``."""
    d = np.asarray(d, dtype=float)
    step = np.asarray(step, dtype=float)
    if d.shape != step.shape:
        raise DimensionError(f"direction has shape {d.shape}, step has shape {step.shape}")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(step))):
        raise ValueError("non-finite input to euclidean_prox")
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    return project_ball(d - step, radius)


def entropy_prox(lam, exponent):
    """Exponentiated-weights update ``lam_i e^{exponent_i} / sum_j lam_j e^{exponent_j}``.

    This is the maximizer over the simplex of ``<exponent, u> - KL(u, lam)``.
    The exponents are shifted by their maximum before exponentiation, and the
    result is floored at ``1e-300`` so that support is never lost to underflow.
    """
    lam = np.asarray(lam, dtype=float)
    exponent = np.asarray(exponent, dtype=float)
    if lam.shape != exponent.shape:
        raise DimensionError(f"weights have shape {lam.shape}, exponent has shape {exponent.shape}")
    if np.any(lam <= 0):
        raise DomainError("entropy prox requires strictly positive weights")
    if not np.all(np.isfinite(exponent)):
        raise ValueError("non-finite exponent")
    e = np.exp(exponent - exponent.max())
    out = lam * e
    out /= out.sum()
    return np.maximum(out, LAMBDA_FLOOR)


def bregman_distance(kind, x, u):
    """Bregman distance ``V(x, u)`` for ``kind`` in ``{"euclidean", "entropy"}``.

    For the entropy case ``V(x, u) = sum_i u_i ln(u_i / x_i)`` with ``0 ln 0 = 0``;
    a zero ``x_i`` paired with a positive ``u_i`` raises :class:`DomainError`.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != u.shape:
        raise DimensionError(f"shapes differ: {x.shape} vs {u.shape}")
    if kind == "euclidean":
        return 0.5 * float(np.sum((x - u) ** 2))
    if kind != "entropy":
        raise ValueError(f"unknown Bregman kind {kind!r}; expected 'euclidean' or 'entropy'")
    if np.any(x < 0) or np.any(u < 0):
        raise DomainError("entropy distance needs nonnegative arguments")
    support = u > 0
    if np.any(x[support] == 0):
        raise DomainError("entropy distance is +inf: x_i = 0 where u_i > 0")
    val = float(np.sum(u[support] * np.log(u[support] / x[support])))
    return max(val, 0.0)


@dataclass(frozen=True)
class GeometryConstants:
    """Scalings of the product norm: ``R_d^2``, ``R_lam^2`` and the diameter bound."""

    R_d_sq: float
    R_lam_sq: float
    D_bar_sq: float = 1.0

    def __post_init__(self):
        if min(self.R_d_sq, self.R_lam_sq, self.D_bar_sq) <= 0:
            raise ValueError("geometry constants must be strictly positive (m >= 2, C_f > 0)")

    @classmethod
    def standard(cls, m, C_f, D_bar_sq=1.0):
        return cls(R_d_sq=C_f**2 / 2.0, R_lam_sq=math.log(m), D_bar_sq=D_bar_sq)

    @classmethod
    def with_preference(cls, m, C_f, mu, C_g, D_bar_sq=1.0):
        return cls(R_d_sq=C_f**2 + mu**2 * C_g**2, R_lam_sq=math.log(m), D_bar_sq=D_bar_sq)


def pair_norm(d, lam, consts):
    d = np.asarray(d, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return math.sqrt(
        float(d @ d) / (2 * consts.R_d_sq) + float(np.abs(lam).sum()) ** 2 / (2 * consts.R_lam_sq)
    )


def pair_dual_norm(g_d, g_lam, consts):
    g_d = np.asarray(g_d, dtype=float)
    g_lam = np.asarray(g_lam, dtype=float)
    linf = float(np.max(np.abs(g_lam))) if g_lam.size else 0.0
    return math.sqrt(2 * consts.R_d_sq * float(g_d @ g_d) + 2 * consts.R_lam_sq * linf**2)
