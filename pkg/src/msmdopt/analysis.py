"""Pareto-front extraction, hypervolume, front distances and rate estimation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import DimensionError


@dataclass
class ParetoFront:
    """Non-dominated subset of a point set, in input order.

    ``indices`` locate the front points in the input, ``origins`` carry
    caller-supplied run identifiers, and ``dominated`` holds the excluded points.
    """

    points: np.ndarray
    indices: np.ndarray
    input_size: int
    origins: List = field(default_factory=list)
    dominated: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.points)

    @property
    def m(self):
        return self.points.shape[1] if self.points.ndim == 2 else 0


def dominates(u, v):
    """``u`` dominates ``v`` under minimization: ``u <= v`` and ``u != v``."""
    u = np.asarray(u)
    v = np.asarray(v)
    return bool(np.all(u <= v) and np.any(u < v))


def nondominated_filter(points, origins=None):
    """Maximal non-dominated subset; exact duplicates do not dominate each other."""
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return ParetoFront(np.zeros((0, 0)), np.zeros(0, dtype=int), 0, [], np.zeros((0, 0)))
    if P.ndim != 2:
        raise DimensionError("points must all have the same dimension m")
    if origins is not None and len(origins) != len(P):
        raise DimensionError(f"{len(origins)} origins for {len(P)} points")
    le = np.all(P[:, None, :] <= P[None, :, :], axis=2)
    lt = np.any(P[:, None, :] < P[None, :, :], axis=2)
    # dom[j, i]: point j dominates point i
    dom = le & lt
    keep = ~dom.any(axis=0)
    idx = np.flatnonzero(keep)
    org = [origins[i] for i in idx] if origins is not None else list(idx)
    return ParetoFront(P[keep], idx, len(P), org, P[~keep])


def _hv2d(P, ref):
    order = np.lexsort((P[:, 1], P[:, 0]))
    area = 0.0
    best = ref[1]
    for x, y in P[order]:
        if y < best:
            area += (ref[0] - x) * (best - y)
            best = y
    return area


def hypervolume(front, ref):
    """Exact Lebesgue measure dominated by ``front`` and bounded by ``ref`` (m = 2 or 3).

    Two objectives use a sort-and-sweep; three objectives sweep slabs along
    the third objective and sum the 2-D areas.
    """
    P = front.points if isinstance(front, ParetoFront) else np.asarray(front, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if P.size == 0:
        return 0.0
    if P.ndim != 2 or P.shape[1] != ref.shape[0]:
        raise DimensionError(f"front of shape {P.shape} does not match reference of length {ref.shape[0]}")
    bad = np.flatnonzero(~np.all(P < ref, axis=1))
    if bad.size:
        raise ValueError(f"points do not strictly dominate the reference point: indices {bad.tolist()}")
    m = P.shape[1]
    if m == 2:
        return float(_hv2d(P, ref))
    if m != 3:
        raise ValueError("hypervolume supports m = 2 or m = 3 only")
    order = np.argsort(P[:, 2], kind="stable")
    P = P[order]
    vol = 0.0
    for i in range(len(P)):
        z_next = P[i + 1, 2] if i + 1 < len(P) else ref[2]
        depth = z_next - P[i, 2]
        if depth > 0:
            vol += _hv2d(P[: i + 1, :2], ref[:2]) * depth
    return float(vol)


def bk1_front_distance(x):
    """Distance from ``x`` to the BK1 Pareto set ``{(t, t) : 0 <= t <= 5}``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DimensionError("BK1 distance needs a 2-D decision vector")
    t = np.clip((x[0] + x[1]) / 2.0, 0.0, 5.0)
    return float(np.hypot(x[0] - t, x[1] - t))


def front_distance(points, front_samples):
    """Nearest-neighbour distance from each objective vector to a sampled true front."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    T = np.asarray(front_samples, dtype=float)
    out = np.empty(len(P))
    for i, p in enumerate(P):
        out[i] = np.sqrt(np.min(np.sum((T - p) ** 2, axis=1)))
    return out


def rate_slope(K_values, means):
    """Least-squares slope of ``ln(means)`` against ``ln(K_values)``."""
    K = np.asarray(K_values, dtype=float)
    y = np.asarray(means, dtype=float)
    if K.shape != y.shape or K.ndim != 1 or K.size < 3:
        raise ValueError("need equal-length sequences with at least 3 entries")
    if np.any(K <= 0) or np.any(y <= 0):
        raise ValueError("rate_slope needs strictly positive K values and means")
    slope, _ = np.polyfit(np.log(K), np.log(y), 1)
    return float(slope)
