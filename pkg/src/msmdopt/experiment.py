"""Experiment configuration, multi-start runner and CSV/JSON export.

Configuration files are flat ``key = value`` text.  ``#`` starts a comment.
A ``[method-name]`` header opens a section whose keys only apply when that
method is selected, overriding top-level keys::

    problem = bk1
    method = msmd
    K = 100

    [adam]
    alpha = 0.001
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional, Tuple

import numpy as np

from . import baselines
from .analysis import bk1_front_distance, front_distance, hypervolume, nondominated_filter
from .benchmarks import PROBLEM_NAMES, get_problem, multi_start, sample_front
from .core import StochasticOracle
from .inner_smd import InnerSchedule
from .msmd import (
    DivergenceError,
    InnerBudgetRule,
    OuterSchedule,
    PreferenceSpec,
    Trajectory,
    TrajectoryRow,
    default_inner_schedule,
    inner_budget,
    outer_step_size,
    solve,
    solve_with_preference,
)

METHODS = ("msmd", "msmd-pref", "mgda", "pcgrad", "smg", "cr-mogm", "sdmgrad-lite", "sgd", "adam", "rmsprop")
INNER_METHODS = ("msmd", "msmd-pref", "sdmgrad-lite")

# step-size grids swept by ``msmdopt sweep``
ALPHA_GRID = (0.001, 0.01, 0.02, 0.03, 0.04, 0.5)
GAMMA_GRID = (0.005, 0.01, 0.05)

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


@dataclass
class RunConfig:
    problem: str
    method: str
    K: int = 100
    n_starts: int = 100
    seed: int = 0
    rho: float = 0.5
    budget: str = "explicit"
    S: int = 300
    inner: str = "constant"
    gamma: float = 0.01
    theta: float = 1.0
    outer: str = "fixed"
    alpha: float = 0.04
    rho_step: float = 1.0
    r: float = 0.5
    pref_w: Optional[Tuple[float, ...]] = None
    mu: float = 1.0
    C_g: Optional[float] = None
    C_f: Optional[float] = None
    beta: float = 0.9
    log_every: int = 0
    timing: bool = False
    workers: int = 1
    output_dir: str = "results"

    def resolved(self):
        out = asdict(self)
        if out["pref_w"] is not None:
            out["pref_w"] = list(out["pref_w"])
        return out


def _to_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_floats(text):
    return tuple(float(t) for t in text.split(","))


def _opt_float(text):
    return None if text.lower() in ("", "none", "auto") else float(text)


_PARSERS = {
    "problem": str.lower, "method": str.lower, "K": int, "n_starts": int, "seed": int,
    "rho": float, "budget": str.lower, "S": int, "inner": str.lower, "gamma": float,
    "theta": float, "outer": str.lower, "alpha": float, "rho_step": float, "r": float,
    "pref_w": _to_floats, "mu": float, "C_g": _opt_float, "C_f": _opt_float,
    "beta": float, "log_every": int, "timing": _to_bool, "workers": int, "output_dir": str,
}
_KEYS_CI = {k.lower(): k for k in _PARSERS}

_CHOICES = {
    "budget": ("explicit", "global_square", "per_iter_square"),
    "inner": ("constant", "fixed", "varying"),
    "outer": ("fixed", "varying"),
}


def _check_range(key, value):
    """Return an error message for an out-of-range value, or ``None``."""
    if key == "problem" and value not in PROBLEM_NAMES:
        return f"unknown problem {value!r}; valid problems: {', '.join(PROBLEM_NAMES)}"
    if key == "method" and value not in METHODS:
        return f"unknown method {value!r}; valid methods: {', '.join(METHODS)}"
    if key in _CHOICES and value not in _CHOICES[key]:
        return f"{key} must be one of {', '.join(_CHOICES[key])}"
    if key in ("K", "n_starts", "S", "workers") and value < 1:
        return f"{key} must be >= 1"
    if key == "log_every" and value < 0:
        return "log_every must be >= 0"
    if key == "seed" and not 0 <= value <= MAX_SEED:
        return "seed must be an unsigned 64-bit integer"
    if key in ("rho", "alpha", "mu") and not (math.isfinite(value) and value >= 0):
        return f"{key} must be finite and >= 0"
    if key in ("gamma", "theta", "rho_step") and not (math.isfinite(value) and value > 0):
        return f"{key} must be finite and > 0"
    if key in ("C_g", "C_f") and value is not None and not value > 0:
        return f"{key} must be > 0"
    if key == "r" and not 0 < value < 1:
        return "r must lie in (0, 1)"
    if key == "beta" and not 0 <= value <= 1:
        return "beta must lie in [0, 1]"
    if key == "pref_w":
        w = np.asarray(value)
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
            return "pref_w must be nonnegative and sum to 1"
    return None


def parse_config(text):
    """Parse and validate configuration text into a :class:`RunConfig`."""
    top, sections = {}, {}
    current = top
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip().lower()
            if name not in METHODS:
                raise ConfigError(f"unknown section [{name}]; sections must name a method: {', '.join(METHODS)}", lineno)
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        canon = _KEYS_CI.get(key.lower()) if key not in _PARSERS else key
        if canon is None:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        try:
            parsed = _PARSERS[canon](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {canon!r}: {exc}", lineno, canon) from None
        problem = _check_range(canon, parsed)
        if problem:
            raise ConfigError(f"{canon}: {problem}", lineno, canon)
        current[canon] = (parsed, lineno)

    end = len(text.splitlines()) + 1
    for required in ("problem", "method"):
        if required not in top:
            raise ConfigError(f"missing required key {required!r}", end, required)
    method = top["method"][0]
    merged = dict(top)
    merged.update(sections.get(method, {}))
    cfg = RunConfig(**{k: v for k, (v, _) in merged.items()})
    if cfg.pref_w is not None:
        m = get_problem(cfg.problem).m
        if len(cfg.pref_w) != m:
            raise ConfigError(f"pref_w has {len(cfg.pref_w)} entries but {cfg.problem} has m={m}",
                              merged["pref_w"][1], "pref_w")
    return cfg


def format_config(cfg):
    """Render a config as text that :func:`parse_config` reads back unchanged."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# running

@dataclass
class RunRecord:
    method: str
    problem: str
    seed: int
    start: int
    k: int
    x: Tuple[float, ...]
    f: Tuple[float, ...]
    alpha: float
    S: int
    wall_ms: float


@dataclass
class StartResult:
    start: int
    records: List[RunRecord]
    draws: int
    expected_draws: int
    error: Optional[str] = None


def child_seed(master_seed, method, start):
    """Order-free 64-bit seed for one start of one method."""
    method_id = zlib.crc32(method.encode("utf-8"))
    ss = np.random.SeedSequence([int(master_seed), method_id, int(start)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _inner_schedule(cfg, oracle, pref=None):
    if cfg.inner == "constant":
        return InnerSchedule.constant(cfg.gamma)
    return default_inner_schedule(oracle, cfg.inner, cfg.theta, pref)


def _outer(cfg):
    return OuterSchedule.fixed(cfg.alpha) if cfg.outer == "fixed" else OuterSchedule.varying(cfg.rho_step)


def _budget(cfg):
    if cfg.budget == "explicit":
        return InnerBudgetRule.explicit(cfg.S)
    return InnerBudgetRule(cfg.budget)


def expected_draws(cfg):
    if cfg.method in INNER_METHODS:
        rule = _budget(cfg)
        total = sum(inner_budget(rule, k, cfg.K) for k in range(cfg.K))
        return 3 * total if cfg.method == "sdmgrad-lite" else total
    return cfg.K


def _baseline_trajectory(cfg, problem, oracle, x0, aux_rng):
    outer = _outer(cfg)
    rule = _budget(cfg)
    x = np.array(x0, dtype=float)
    traj = Trajectory()
    start_draws = oracle.draws
    cr_state = baselines.CrMogmState.initial(problem.m, cfg.beta)
    ws_state = baselines.WeightedSumState(cfg.method) if cfg.method in ("sgd", "adam", "rmsprop") else None
    lam = None
    for k in range(cfg.K):
        alpha = outer_step_size(outer, k)
        S = 0
        if cfg.method in ("mgda", "smg"):
            if cfg.method == "mgda":
                x_next = baselines.mgda_step(oracle.sample(x), x, alpha)
            else:
                x_next = baselines.smg_step(oracle, x, alpha)
        elif cfg.method == "pcgrad":
            x_next = baselines.pcgrad_step(oracle, x, alpha, aux_rng)
        elif cfg.method == "cr-mogm":
            cr_state, x_next = baselines.cr_mogm_step(cr_state, oracle, x, alpha)
        elif cfg.method == "sdmgrad-lite":
            S = inner_budget(rule, k, cfg.K)
            x_next, lam = baselines.sdmgrad_lite_step(oracle, x, alpha, S, cfg.gamma, lam)
        else:
            ws_state, x_next = baselines.weighted_sum_step(cfg.method, ws_state, oracle, x, alpha)
        d_norm = float(np.linalg.norm(x_next - x) / alpha) if alpha > 0 else 0.0
        traj.rows.append(TrajectoryRow(k, x.copy(), np.asarray(problem.evaluate(x), dtype=float), alpha, S, d_norm))
        if not np.all(np.isfinite(x_next)):
            traj.draws = oracle.draws - start_draws
            raise DivergenceError(f"non-finite iterate at outer step {k + 1}", traj)
        x = x_next
    traj.rows.append(TrajectoryRow(cfg.K, x.copy(), np.asarray(problem.evaluate(x), dtype=float), 0.0, 0, 0.0))
    traj.draws = oracle.draws - start_draws
    return traj


def run_start(cfg, start, x0):
    """Run one start of the configured method and return its records."""
    spec = get_problem(cfg.problem)
    problem = spec.instance
    ss = np.random.SeedSequence(child_seed(cfg.seed, cfg.method, start))
    oracle_ss, aux_ss = ss.spawn(2)
    oracle = StochasticOracle(problem, cfg.rho, seed=oracle_ss, gradient_bound=cfg.C_f)
    aux_rng = np.random.default_rng(aux_ss)
    t0 = time.perf_counter()
    error = None
    try:
        if cfg.method == "msmd":
            traj = solve(problem, oracle, x0, cfg.K, _outer(cfg), _inner_schedule(cfg, oracle),
                         _budget(cfg), cfg.r)
        elif cfg.method == "msmd-pref":
            w = np.full(problem.m, 1.0 / problem.m) if cfg.pref_w is None else np.asarray(cfg.pref_w)
            pref = PreferenceSpec(w, cfg.mu, cfg.C_g)
            traj = solve_with_preference(problem, oracle, x0, cfg.K, pref, _outer(cfg),
                                         _inner_schedule(cfg, oracle, pref), _budget(cfg), cfg.r)
        else:
            # overflow on the way to a divergence is reported through DivergenceError
            with np.errstate(over="ignore", invalid="ignore"):
                traj = _baseline_trajectory(cfg, problem, oracle, x0, aux_rng)
    except DivergenceError as exc:
        traj, error = exc.trajectory, str(exc)
    except Exception as exc:  # recorded as a failed row, the runner continues
        traj, error = None, f"{type(exc).__name__}: {exc}"
    wall = (time.perf_counter() - t0) * 1000.0 if cfg.timing else 0.0

    def record(row):
        return RunRecord(cfg.method, cfg.problem, cfg.seed, start, row.k,
                         tuple(float(v) for v in row.x), tuple(float(v) for v in row.F),
                         float(row.alpha), int(row.S), float(wall))

    if traj is None or not traj.rows:
        F0 = np.asarray(problem.evaluate(np.asarray(x0, dtype=float)), dtype=float)
        recs = [RunRecord(cfg.method, cfg.problem, cfg.seed, start, -1,
                          tuple(float(v) for v in x0), tuple(float(v) for v in F0), 0.0, 0, float(wall))]
        return StartResult(start, recs, oracle.draws, expected_draws(cfg), error)
    rows = traj.rows
    if cfg.log_every > 0:
        keep = [row for row in rows[:-1] if row.k % cfg.log_every == 0] + [rows[-1]]
    else:
        keep = [rows[-1]]
    return StartResult(start, [record(r) for r in keep], oracle.draws, expected_draws(cfg), error)


def _run_start_args(args):
    return run_start(*args)


@dataclass
class ExperimentResult:
    config: RunConfig
    starts: List[StartResult] = field(default_factory=list)

    @property
    def records(self):
        return [rec for s in self.starts for rec in s.records]

    @property
    def terminal_records(self):
        return [s.records[-1] for s in self.starts]

    @property
    def failures(self):
        return [{"start": s.start, "error": s.error} for s in self.starts if s.error]


def run_experiment(cfg, workers=None):
    """Run every start of ``cfg``; results do not depend on execution order."""
    spec = get_problem(cfg.problem)
    starts = multi_start(spec, cfg.n_starts, cfg.seed)
    jobs = [(cfg, i, x0) for i, x0 in enumerate(starts)]
    workers = cfg.workers if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_start_args, jobs))
    else:
        results = [run_start(*job) for job in jobs]
    results.sort(key=lambda r: r.start)
    return ExperimentResult(cfg, results)


def records_to_arrays(records):
    F = np.array([r.f for r in records], dtype=float)
    X = np.array([r.x for r in records], dtype=float)
    return X, F


def compute_metrics(result):
    """Front size, hypervolume and distance summaries of the terminal points."""
    cfg = result.config
    spec = get_problem(cfg.problem)
    terminals = [r for r in result.terminal_records if r.k >= 0]
    out = {
        "n_terminal": len(terminals),
        "n_failed": len(result.failures),
        "oracle_draws": {
            "measured": int(sum(s.draws for s in result.starts)),
            "expected": int(sum(s.expected_draws for s in result.starts)),
        },
    }
    if not terminals:
        return out
    X, F = records_to_arrays(terminals)
    finite = np.all(np.isfinite(F), axis=1)
    front = nondominated_filter(F[finite], origins=[r.start for r, ok in zip(terminals, finite) if ok])
    out["front_size"] = len(front)
    ref = spec.reference_point
    inside = np.all(front.points < ref, axis=1) if len(front) else np.zeros(0, dtype=bool)
    out["hypervolume"] = hypervolume(front.points[inside], ref) if inside.any() else 0.0
    out["hypervolume_excluded"] = int((~inside).sum())
    out["reference_point"] = [float(v) for v in ref]
    if cfg.problem == "bk1":
        dist = np.array([bk1_front_distance(x) for x in X])
        out["bk1_distance_median"] = float(np.median(dist))
        out["bk1_fraction_within_0.5"] = float(np.mean(dist <= 0.5))
    elif spec.known_front is not None:
        out["front_distance_median"] = float(np.median(front_distance(F[finite], sample_front(spec))))
    if len(front):
        out["front_f_min"] = [float(v) for v in front.points.min(axis=0)]
        out["front_f_max"] = [float(v) for v in front.points.max(axis=0)]
    return out


# ---------------------------------------------------------------------------
# export

def csv_header(n, m):
    return (["method", "problem", "seed", "start", "k"]
            + [f"x{i}" for i in range(n)] + [f"f{i}" for i in range(m)]
            + ["alpha", "S", "wall_ms"])


def _fmt(v):
    return repr(float(v))


def export_csv(records, path):
    if not records:
        raise ValueError("no records to export")
    n, m = len(records[0].x), len(records[0].f)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(n, m))
    for r in records:
        writer.writerow([r.method, r.problem, r.seed, r.start, r.k]
                        + [_fmt(v) for v in r.x] + [_fmt(v) for v in r.f]
                        + [_fmt(r.alpha), r.S, _fmt(r.wall_ms)])
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = sum(1 for h in header if h.startswith("x"))
    m = sum(1 for h in header if h.startswith("f"))
    out = []
    for row in body:
        out.append(RunRecord(
            row[0], row[1], int(row[2]), int(row[3]), int(row[4]),
            tuple(float(v) for v in row[5:5 + n]), tuple(float(v) for v in row[5 + n:5 + n + m]),
            float(row[5 + n + m]), int(row[6 + n + m]), float(row[7 + n + m]),
        ))
    return out


def export_json(result, path, metrics=None):
    cfg = result.config
    payload = {
        "config": cfg.resolved(),
        "optimizer_constants": {
            "adam_betas": list(baselines.ADAM_BETAS),
            "adam_eps": baselines.ADAM_EPS,
            "rmsprop_decay": baselines.RMSPROP_DECAY,
            "rmsprop_eps": baselines.RMSPROP_EPS,
            "frank_wolfe_max_iters": baselines.FW_MAX_ITERS,
            "frank_wolfe_tol": baselines.FW_TOL,
        },
        "metrics": compute_metrics(result) if metrics is None else metrics,
        "failures": result.failures,
        "records": [asdict(r) for r in result.records],
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write JSON to {path}: {exc}") from exc
    return payload
