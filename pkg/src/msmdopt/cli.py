"""Command-line entry point: ``msmdopt {run,sweep,plot,validate}``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.  The
output directory from the config is overridden by ``$MSMDOPT_OUTPUT_DIR``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import nondominated_filter
from .experiment import (
    ALPHA_GRID,
    GAMMA_GRID,
    METHODS,
    ConfigError,
    compute_metrics,
    export_csv,
    export_json,
    format_config,
    parse_config,
    run_experiment,
)
from .svg import emit_svg_scatter

OUTPUT_ENV = "MSMDOPT_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def output_dir(cfg):
    return Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)


def terminal_fronts(records):
    """Method -> front of the last valid row of each start."""
    last = {}
    for r in records:
        if r["k"] < 0:
            continue
        key = (r["method"], r["start"])
        if key not in last or r["k"] >= last[key]["k"]:
            last[key] = r
    by_method = {}
    for (method, start), r in sorted(last.items()):
        by_method.setdefault(method, []).append(r["f"])
    fronts = {}
    for method, pts in by_method.items():
        P = np.array(pts, dtype=float)
        fronts[method] = nondominated_filter(P[np.all(np.isfinite(P), axis=1)])
    return fronts


def cmd_run(args):
    cfg = _load_config(args.config)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    result = run_experiment(cfg)
    stem = out / f"{cfg.problem}_{cfg.method}"
    metrics = compute_metrics(result)
    export_csv(result.records, f"{stem}.csv")
    payload = export_json(result, f"{stem}.json", metrics)
    fronts = terminal_fronts(payload["records"])
    emit_svg_scatter(fronts, f"{stem}.svg", m=len(result.records[0].f),
                     title=f"{cfg.problem} / {cfg.method}", style_order=METHODS)
    print(f"wrote {stem}.csv, {stem}.json, {stem}.svg")
    print(f"front size {metrics.get('front_size', 0)}, hypervolume {metrics.get('hypervolume', 0.0):.6g}")
    for fail in result.failures:
        print(f"start {fail['start']} failed: {fail['error']}", file=sys.stderr)
    return EXIT_RUNTIME if result.failures else EXIT_OK


def cmd_sweep(args):
    cfg = _load_config(args.config)
    out = output_dir(cfg) / "sweep"
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    for alpha in ALPHA_GRID:
        for gamma in GAMMA_GRID:
            point = dataclasses.replace(cfg, alpha=alpha, gamma=gamma, inner="constant")
            path = out / f"{stem}_a{alpha:g}_g{gamma:g}.cfg"
            path.write_text(format_config(point), encoding="utf-8")
            print(path)
    return EXIT_OK


def cmd_plot(args):
    records = []
    m = None
    for path in args.results:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        records.extend(payload["records"])
        if payload["records"]:
            m = len(payload["records"][0]["f"])
    emit_svg_scatter(terminal_fronts(records), args.out, m=m, style_order=METHODS)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_validate(args):
    cfg = _load_config(args.config)
    for key, value in cfg.resolved().items():
        print(f"{key} = {value}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="msmdopt", description="Stochastic multiobjective optimization experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("config")
    run.add_argument("--workers", type=int, default=None, help="parallel processes (overrides config)")
    run.set_defaults(func=cmd_run)
    sweep = sub.add_parser("sweep", help="write one config per step-size grid point")
    sweep.add_argument("config")
    sweep.set_defaults(func=cmd_sweep)
    plot = sub.add_parser("plot", help="scatter plot of terminal fronts from result files")
    plot.add_argument("results", nargs="+", help="results JSON files followed by the output SVG path")
    plot.set_defaults(func=cmd_plot)
    val = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        if len(args.results) < 2:
            print("error: plot needs at least one results file and an output path", file=sys.stderr)
            return EXIT_CONFIG
        args.results, args.out = args.results[:-1], args.results[-1]
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
