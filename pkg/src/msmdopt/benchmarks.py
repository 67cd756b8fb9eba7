"""Benchmark problems BK1, FF1, Lov1, Lov3, Toi4 and MOP5 with box bounds.

Definitions follow the usual multiobjective test collections:

======  ==  ==========================================================  ================
name    n   objectives                                                  box
======  ==  ==========================================================  ================
BK1     2   x1^2 + x2^2;  (x1-5)^2 + (x2-5)^2                            [-5, 10]^2
FF1     2   1 - exp(-(x1-1)^2 - (x2+1)^2);  1 - exp(-(x1+1)^2 - (x2-1)^2)  [-1, 1]^2
Lov1    2   1.05 x1^2 + 0.98 x2^2;  0.99 (x1-3)^2 + 1.03 (x2-2.5)^2      [-10, 10]^2
Lov3    2   x1^2 + x2^2;  (x1-6)^2 - (x2+0.3)^2                          [-20, 20]^2
Toi4    4   x1^2 + x2^2 + 1;  0.5 ((x1-x2)^2 + (x3-x4)^2) + 1           [-2, 5]^4
MOP5    2   Viennet's three objectives                                  [-30, 30]^2
======  ==  ==========================================================  ================
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .core import ProblemInstance


class UnknownProblemError(KeyError):
    def __str__(self):
        return self.args[0]


@dataclass(frozen=True, eq=False)
class BenchmarkSpec:
    """A named benchmark: the problem, a hypervolume reference point and,
    when known in closed form, a sampler ``t in [0, 1] -> F`` of the true front."""

    name: str
    instance: ProblemInstance
    reference_point: np.ndarray
    known_front: Optional[Callable[[float], np.ndarray]] = None

    @property
    def m(self):
        return self.instance.m

    @property
    def n(self):
        return self.instance.n


def _bk1():
    def f(x):
        x1, x2 = x
        return np.array([x1**2 + x2**2, (x1 - 5) ** 2 + (x2 - 5) ** 2])

    def g(x):
        x1, x2 = x
        return np.array([[2 * x1, 2 * x2], [2 * (x1 - 5), 2 * (x2 - 5)]])

    def pset(t):
        return np.array([5.0 * t, 5.0 * t])

    inst = ProblemInstance("bk1", 2, 2, np.full(2, -5.0), np.full(2, 10.0), f, g, known_pareto_set=pset)
    return BenchmarkSpec("bk1", inst, np.array([55.0, 55.0]), lambda t: f(pset(t)))


def _ff1():
    def f(x):
        x1, x2 = x
        return np.array([
            1 - np.exp(-((x1 - 1) ** 2) - (x2 + 1) ** 2),
            1 - np.exp(-((x1 + 1) ** 2) - (x2 - 1) ** 2),
        ])

    def g(x):
        x1, x2 = x
        e1 = np.exp(-((x1 - 1) ** 2) - (x2 + 1) ** 2)
        e2 = np.exp(-((x1 + 1) ** 2) - (x2 - 1) ** 2)
        return np.array([
            [2 * (x1 - 1) * e1, 2 * (x2 + 1) * e1],
            [2 * (x1 + 1) * e2, 2 * (x2 - 1) * e2],
        ])

    def pset(t):
        # segment between the two minimizers (1, -1) and (-1, 1)
        s = 1.0 - 2.0 * t
        return np.array([s, -s])

    inst = ProblemInstance("ff1", 2, 2, np.full(2, -1.0), np.full(2, 1.0), f, g, known_pareto_set=pset)
    return BenchmarkSpec("ff1", inst, np.array([1.1, 1.1]), lambda t: f(pset(t)))


def _lov1():
    a1, a2, b1, b2 = 1.05, 0.98, 0.99, 1.03

    def f(x):
        x1, x2 = x
        return np.array([a1 * x1**2 + a2 * x2**2, b1 * (x1 - 3) ** 2 + b2 * (x2 - 2.5) ** 2])

    def g(x):
        x1, x2 = x
        return np.array([[2 * a1 * x1, 2 * a2 * x2], [2 * b1 * (x1 - 3), 2 * b2 * (x2 - 2.5)]])

    def pset(t):
        # minimizers of (1 - t) f1 + t f2, separable per coordinate
        return np.array([
            t * b1 * 3 / ((1 - t) * a1 + t * b1),
            t * b2 * 2.5 / ((1 - t) * a2 + t * b2),
        ])

    inst = ProblemInstance("lov1", 2, 2, np.full(2, -10.0), np.full(2, 10.0), f, g, known_pareto_set=pset)
    return BenchmarkSpec("lov1", inst, np.array([17.0, 17.0]), lambda t: f(pset(t)))


def _lov3():
    def f(x):
        x1, x2 = x
        return np.array([x1**2 + x2**2, (x1 - 6) ** 2 - (x2 + 0.3) ** 2])

    def g(x):
        x1, x2 = x
        return np.array([[2 * x1, 2 * x2], [2 * (x1 - 6), -2 * (x2 + 0.3)]])

    inst = ProblemInstance("lov3", 2, 2, np.full(2, -20.0), np.full(2, 20.0), f, g)
    # f1 <= 800 and f2 <= 26^2 on the box
    return BenchmarkSpec("lov3", inst, np.array([810.0, 686.0]))


def _toi4():
    def f(x):
        x1, x2, x3, x4 = x
        return np.array([x1**2 + x2**2 + 1, 0.5 * ((x1 - x2) ** 2 + (x3 - x4) ** 2) + 1])

    def g(x):
        x1, x2, x3, x4 = x
        return np.array([
            [2 * x1, 2 * x2, 0.0, 0.0],
            [x1 - x2, x2 - x1, x3 - x4, x4 - x3],
        ])

    def pset(t):
        # the ideal point (1, 1) is attained on {x1 = x2 = 0, x3 = x4}
        c = -2.0 + 7.0 * t
        return np.array([0.0, 0.0, c, c])

    inst = ProblemInstance("toi4", 2, 4, np.full(4, -2.0), np.full(4, 5.0), f, g, known_pareto_set=pset)
    # f1 <= 51 and f2 <= 50 on the box
    return BenchmarkSpec("toi4", inst, np.array([52.0, 51.0]), lambda t: f(pset(t)))


def _mop5():
    def f(x):
        x1, x2 = x
        r2 = x1**2 + x2**2
        return np.array([
            0.5 * r2 + np.sin(r2),
            (3 * x1 - 2 * x2 + 4) ** 2 / 8 + (x1 - x2 + 1) ** 2 / 27 + 15,
            1 / (r2 + 1) - 1.1 * np.exp(-r2),
        ])

    def g(x):
        x1, x2 = x
        r2 = x1**2 + x2**2
        c1 = 1 + 2 * np.cos(r2)
        a = 3 * x1 - 2 * x2 + 4
        b = x1 - x2 + 1
        c3 = -1 / (r2 + 1) ** 2 + 1.1 * np.exp(-r2)
        return np.array([
            [x1 * c1, x2 * c1],
            [3 * a / 4 + 2 * b / 27, -2 * a / 4 - 2 * b / 27],
            [2 * x1 * c3, 2 * x2 * c3],
        ])

    inst = ProblemInstance("mop5", 3, 2, np.full(2, -30.0), np.full(2, 30.0), f, g)
    # f1 <= 0.5*1800 + 1, f2 <= 154^2/8 + 61^2/27 + 15 ~ 3117.3, f3 < 1
    return BenchmarkSpec("mop5", inst, np.array([902.0, 3120.0, 1.1]))


_FACTORIES = {
    "bk1": _bk1,
    "ff1": _ff1,
    "lov1": _lov1,
    "lov3": _lov3,
    "toi4": _toi4,
    "mop5": _mop5,
}
PROBLEM_NAMES = tuple(_FACTORIES)


def get_problem(name):
    """Benchmark by case-insensitive name; instances are immutable and shared."""
    key = str(name).strip().lower()
    if key not in _FACTORIES:
        raise UnknownProblemError(f"unknown problem {name!r}; available: {', '.join(PROBLEM_NAMES)}")
    return _build(key)


@lru_cache(maxsize=None)
def _build(key):
    return _FACTORIES[key]()


def noisy_gradient(spec, x, rho, rng):
    """True gradient plus independent ``Normal(0, (rho * range_j)^2)`` noise per entry."""
    if rho < 0:
        raise ValueError("noise ratio must be >= 0")
    inst = spec.instance if isinstance(spec, BenchmarkSpec) else spec
    G = np.asarray(inst.gradient(np.asarray(x, dtype=float)), dtype=float)
    if rho == 0:
        return G
    return G + rng.standard_normal(G.shape) * (rho * inst.ranges)


def multi_start(spec, n_starts=100, seed=0):
    """``n_starts`` i.i.d. uniform points in the box of ``spec``."""
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    inst = spec.instance if isinstance(spec, BenchmarkSpec) else spec
    rng = np.random.default_rng(seed)
    pts = rng.uniform(inst.lower_bounds, inst.upper_bounds, size=(n_starts, inst.n))
    return [p for p in pts]


def sample_front(spec, n_points=10_000):
    """Objective vectors of the known front at ``n_points`` equally spaced parameters."""
    if spec.known_front is None:
        raise ValueError(f"no closed-form front is known for {spec.name}")
    ts = np.linspace(0.0, 1.0, n_points)
    return np.array([spec.known_front(t) for t in ts])
