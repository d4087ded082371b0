"""Command line entry point: ``udnscale {simulate,tail,sweep,classify,validate}``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .config import ConfigError, ExperimentConfig, km_to_m_density, load_config
from .experiments import predict_regime, regime_report, run_sweep
from .io import read_sweep, write_capacity_csv, write_coverage_csv, write_tail_csv, write_text
from .sinr import capacity_from_samples, coverage_from_samples, sample_sinr
from .streams import substream
from .tails import (
    UnsupportedCaseError,
    analytic_tail_p,
    asymptotic_tail_p,
    classify_received_power,
    empirical_ccdf,
    sample_received_power,
)
from .fading import Pareto

log = logging.getLogger("udnscale")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default if suppress else "fig5", help="config file or preset name")
    parser.add_argument("--seed", type=int, default=default, help="override the config seed")
    parser.add_argument("--out", default=default if suppress else ".", help="output directory")
    parser.add_argument("--workers", type=int, default=default, help="worker processes (env UDNSCALE_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="udnscale", description=__doc__)
    _global_flags(p, suppress=False)
    p.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="coverage and capacity at one density")
    s.add_argument("--lambda", dest="lam", type=float, required=True, help="density per km^d")
    s.add_argument("--y", type=_floats, default=None, help="comma-separated SINR thresholds")
    s.add_argument("--trials", type=int, default=None)

    t = sub.add_parser("tail", parents=[common], help="single-node received power tail")
    t.add_argument("--samples", type=int, default=100_000)
    t.add_argument("--t-min", type=float, default=1e-12)
    t.add_argument("--t-max", type=float, default=1e6)
    t.add_argument("--points", type=int, default=73)

    w = sub.add_parser("sweep", parents=[common], help="density sweep with regime report")
    w.add_argument("--trials", type=int, default=None)

    c = sub.add_parser("classify", parents=[common], help="regime report from a sweep")
    c.add_argument("--from", dest="from_dir", default=None, help="reuse coverage.csv/capacity.csv in this directory")
    c.add_argument("--optimize", action="store_true", help="refine the optimal densities by golden-section search")
    c.add_argument("--trials", type=int, default=None)

    sub.add_parser("validate", parents=[common], help="load, validate and echo a config")
    return p


def _sim(cfg: ExperimentConfig, args, trials=None):
    return cfg.sim_config(seed=args.seed, trials=trials)


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    sys.stdout.write(cfg.dump())
    sys.stdout.write(f"# predicted regime: {predict_regime(cfg.model, cfg.fading, cfg.domain).value}\n")
    sys.stdout.write(f"# received power tail: {classify_received_power(cfg.model, cfg.fading)}\n")
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    sim = _sim(cfg, args, args.trials)
    lam = km_to_m_density(args.lam, cfg.domain.d)
    y = np.asarray(args.y if args.y else cfg.sweep.y_refs, dtype=float)
    s = sample_sinr(sim, lam, workers=args.workers)
    cov = coverage_from_samples(s.Y, y, lam, sim.seed)
    cap = capacity_from_samples(s.Y, lam)
    if cap.diverged:
        log.warning("%d realizations with infinite SINR; capacity reports the finite part", cap.n_infinite)
    write_coverage_csv(cov, os.path.join(args.out, "coverage.csv"), cfg.domain.d)
    write_capacity_csv(cap, os.path.join(args.out, "capacity.csv"), cfg.domain.d)
    print(f"r_sim={s.truncation.r_sim!r} rel_bias={s.truncation.rel_bias!r} c_hat={cap.c_hat!r}")
    return EXIT_OK


def cmd_tail(cfg: ExperimentConfig, args) -> int:
    model, f, dom = cfg.model, cfg.fading, cfg.domain
    seed = cfg.simulation.seed if args.seed is None else args.seed
    ts = np.logspace(math.log10(args.t_min), math.log10(args.t_max), args.points)
    analytic = analytic_tail_p(ts, model, f, dom)
    samples = sample_received_power(args.samples, model, f, dom, substream(seed, "tail"))
    empirical = empirical_ccdf(samples, ts).ccdf
    asym = None
    if isinstance(f, Pareto):
        try:
            asym = asymptotic_tail_p(ts, model, f, dom)
        except UnsupportedCaseError as exc:
            log.warning("no asymptotic column: %s", exc)
    write_tail_csv(ts, analytic, empirical, asym, os.path.join(args.out, "tail.csv"))
    print(f"tail class: {classify_received_power(model, f)}")
    return EXIT_OK


def _report(cfg, sim, sweep, args, optimize=False):
    sw = cfg.sweep
    rep = regime_report(sim, sweep, sw.y_ref, sw.eps, sw.delta, sw.u, sw.z, optimize=optimize, workers=args.workers)
    write_text(rep.to_text(), os.path.join(args.out, "report.txt"))
    sys.stdout.write(rep.to_text())
    return rep


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    sim = _sim(cfg, args, args.trials)
    sweep = run_sweep(sim, cfg.lambda_grid(), cfg.sweep.y_refs, workers=args.workers)
    for i, msg in sweep.errors.items():
        log.error("density index %d failed: %s", i, msg)
    write_coverage_csv(sweep.coverage, os.path.join(args.out, "coverage.csv"), cfg.domain.d)
    write_capacity_csv(sweep.capacity, os.path.join(args.out, "capacity.csv"), cfg.domain.d)
    _report(cfg, sim, sweep, args)
    return EXIT_RUNTIME if sweep.errors else EXIT_OK


def cmd_classify(cfg: ExperimentConfig, args) -> int:
    sim = _sim(cfg, args, args.trials)
    if args.from_dir:
        sweep = read_sweep(
            os.path.join(args.from_dir, "coverage.csv"), os.path.join(args.from_dir, "capacity.csv"), cfg.domain.d
        )
        sim = replace(sim, seed=sweep.seed)
    else:
        sweep = run_sweep(sim, cfg.lambda_grid(), cfg.sweep.y_refs, workers=args.workers)
    _report(cfg, sim, sweep, args, optimize=args.optimize)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "tail": cmd_tail,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, RuntimeError, MemoryError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
