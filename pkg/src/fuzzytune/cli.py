"""
Command-line front end.

    optimize   --config <path> [--seed <u64>] --out <dir>
    simulate   --params <path> --theta0 <rad> --out <csv>
    sweep      --params <path> --min <rad> --max <rad> --steps <n> --out <dir>
    plot       --in <csv> --x <col> --y <col>[,<col>...] --out <svg>
    membership --params <path> --out <svg>

Exit status: 0 success, 2 bad configuration/parameters/arguments, 3 file
system failure.
"""

from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from attrs import evolve

from src.fuzzytune.control.closed_loop import settling_band, settling_time, simulate
from src.fuzzytune.data.config import RunConfig, load_config
from src.fuzzytune.data.files import (
    read_params,
    write_history,
    write_params,
    write_run_meta,
    write_sweep,
    write_trace,
)
from src.fuzzytune.errors import FuzzytuneError
from src.fuzzytune.optim.hybrid import optimize, total_evaluations
from src.fuzzytune.viz.plots import membership_figure, plot_csv, response_chart


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FILESYSTEM = 3


def _load(config_path: str | None) -> RunConfig:
    return load_config(config_path) if config_path else RunConfig()


def _banner(title: str) -> None:
    logger.info("=" * 70)
    logger.info(title)
    logger.info("=" * 70)


# --------------------------------------------------
# Commands
# --------------------------------------------------
def cmd_optimize(args: argparse.Namespace) -> int:
    config = _load(args.config)
    seed_source = "config"
    if args.seed is not None:
        config = config.with_seed(args.seed)
        seed_source = "cli"

    out = Path(args.out or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    _banner("fuzzytune - hybrid PSO/TS controller tuning")
    logger.info(f"Seed {config.seed} ({seed_source}), budget {total_evaluations(config.hybrid)} evaluations")

    start_time = time.perf_counter()
    result = optimize(config.hybrid, config.plant, config.sim, config.gains)
    elapsed = time.perf_counter() - start_time

    trace = simulate(result.params, config.plant, config.sim)
    ts = settling_time(trace, settling_band(config.sim.theta0))

    write_params(result.params, out / "best_params.txt")
    write_history(result.history, out / "history.csv")
    write_trace(trace, out / "trace_best.csv")
    write_run_meta(
        config,
        {
            "seed": config.seed,
            "seed_source": seed_source,
            "prng": result.prng,
            "wall_clock_seconds": f"{elapsed:.3f}",
            "evaluations": result.evaluations,
            "best_mse": repr(result.fitness),
            "initial_best_mse": repr(result.initial_best_fitness),
        },
        out / "run_meta.txt",
    )
    membership_figure(result.params, out / "membership.svg")
    response_chart({f"theta0 = {config.sim.theta0:g}": trace}, out / "response.svg")

    _banner(f"Done in {elapsed:.2f}s: best MSE {result.fitness:.6g}")
    logger.info(f"Settling time: {'unstable' if ts is None else f'{ts:.3f} s'}")
    logger.info(f"Artifacts written to {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load(args.config)
    params = read_params(args.params)
    theta0 = config.sim.theta0 if args.theta0 is None else args.theta0
    sim = evolve(config.sim, theta0=theta0)

    trace = simulate(params, config.plant, sim)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out)

    ts = settling_time(trace, settling_band(theta0))
    print("unstable" if ts is None else f"{ts:.4f}")
    logger.info(f"Trace written to {out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.steps < 2:
        raise ValueError(f"--steps must be at least 2, got {args.steps}")
    if not args.min < args.max:
        raise ValueError(f"--min {args.min} must be below --max {args.max}")

    config = _load(args.config)
    params = read_params(args.params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    traces = {}
    for i, theta0 in enumerate(np.linspace(args.min, args.max, args.steps)):
        theta0 = float(theta0)
        trace = simulate(params, config.plant, evolve(config.sim, theta0=theta0))
        ts = settling_time(trace, settling_band(theta0))
        write_trace(trace, out / f"trace_{i:02d}.csv")
        rows.append(
            {
                "theta0": theta0,
                "settled": ts is not None,
                "settling_time": ts,
                "final_abs_theta": trace.final_abs_theta,
            }
        )
        traces[f"theta0 = {theta0:.3f}"] = trace
        logger.info(f"theta0 = {theta0:.4f}: {'unstable' if ts is None else f'settled in {ts:.3f} s'}")

    write_sweep(rows, out / "sweep_summary.csv")
    response_chart(traces, out / "sweep_response.svg")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    ys = [y.strip() for y in args.y.split(",") if y.strip()]
    if not ys:
        raise ValueError("--y needs at least one column")
    plot_csv(args.input, args.x, ys, args.out)
    logger.info(f"Chart written to {args.out}")
    return EXIT_OK


def cmd_membership(args: argparse.Namespace) -> int:
    membership_figure(read_params(args.params), args.out)
    logger.info(f"Membership figure written to {args.out}")
    return EXIT_OK


# --------------------------------------------------
# Entry point
# --------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzytune",
        description="Tune a Takagi-Sugeno fuzzy pendulum controller with hybrid PSO / tabu search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="Run the hybrid optimisation and write its artifacts")
    p.add_argument("--config", help="Run-config file (defaults apply when omitted)")
    p.add_argument("--seed", type=int, help="Override the config seed")
    p.add_argument("--out", help="Output directory (default: out_dir from the config)")
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("simulate", help="Simulate one controller and print its settling time")
    p.add_argument("--params", required=True, help="Controller parameter file")
    p.add_argument("--theta0", type=float, help="Initial angle in rad (default: config theta0)")
    p.add_argument("--out", required=True, help="Trace CSV to write")
    p.add_argument("--config", help="Run-config file for plant and simulation settings")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep", help="Simulate over evenly spaced initial angles")
    p.add_argument("--params", required=True, help="Controller parameter file")
    p.add_argument("--min", type=float, required=True, help="Smallest initial angle (rad)")
    p.add_argument("--max", type=float, required=True, help="Largest initial angle (rad)")
    p.add_argument("--steps", type=int, required=True, help="Number of initial angles (>= 2)")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--config", help="Run-config file for plant and simulation settings")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("plot", help="Render CSV columns as an SVG line chart")
    p.add_argument("--in", dest="input", required=True, help="CSV file")
    p.add_argument("--x", required=True, help="Column for the x axis")
    p.add_argument("--y", required=True, help="Comma-separated y columns")
    p.add_argument("--out", required=True, help="SVG file to write")
    p.set_defaults(handler=cmd_plot)

    p = sub.add_parser("membership", help="Render the membership functions of a parameter file")
    p.add_argument("--params", required=True, help="Controller parameter file")
    p.add_argument("--out", required=True, help="SVG file to write")
    p.set_defaults(handler=cmd_membership)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (FuzzytuneError, ValueError) as err:
        logger.error(f"error: {err}")
        return EXIT_INVALID
    except OSError as err:
        logger.error(f"file system error: {err}")
        return EXIT_FILESYSTEM
