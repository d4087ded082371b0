"""CSV and report files. Byte-identical output for identical inputs."""

from __future__ import annotations

import csv
import os
from collections import OrderedDict

import numpy as np

from .experiments import SweepResult
from .sinr import CapacityEstimate, CoverageCurve

COVERAGE_HEADER = ("lambda", "y", "p_hat", "ci", "trials", "seed")
CAPACITY_HEADER = ("lambda", "c_hat", "std_err", "diverged")
TAIL_HEADER = ("t", "analytic", "empirical", "asymptotic")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17e" % float(x)


def _write(path, header, rows):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _density_out(lam: float, d: int) -> float:
    return lam * 1000.0**d


def coverage_rows(curves, d: int = 2):
    for c in curves:
        if c is None:
            continue
        for y, p, ci in zip(c.y_grid, c.p_hat, c.ci_halfwidth):
            yield (_density_out(c.lam, d), float(y), float(p), float(ci), int(c.trials), int(c.seed))


def capacity_rows(estimates, d: int = 2):
    for e in estimates:
        if e is None:
            continue
        yield (_density_out(e.lam, d), e.c_hat, e.std_err, bool(e.diverged))


def write_coverage_csv(curves, path, d: int = 2):
    if isinstance(curves, CoverageCurve):
        curves = [curves]
    _write(path, COVERAGE_HEADER, coverage_rows(curves, d))


def write_capacity_csv(estimates, path, d: int = 2):
    if isinstance(estimates, CapacityEstimate):
        estimates = [estimates]
    _write(path, CAPACITY_HEADER, capacity_rows(estimates, d))


def write_tail_csv(t, analytic, empirical, asymptotic, path):
    n = len(t)

    def col(v):
        return [None] * n if v is None else list(v)

    _write(path, TAIL_HEADER, zip(list(t), col(analytic), col(empirical), col(asymptotic)))


def emit_csv(obj, path, d: int = 2):
    """Write a coverage curve, capacity estimate, or sweep (coverage part) as CSV."""
    if isinstance(obj, SweepResult):
        write_coverage_csv(obj.coverage, path, d)
    elif isinstance(obj, CoverageCurve) or (isinstance(obj, list) and all(isinstance(o, CoverageCurve) for o in obj)):
        write_coverage_csv(obj, path, d)
    elif isinstance(obj, CapacityEstimate) or (
        isinstance(obj, list) and all(isinstance(o, CapacityEstimate) for o in obj)
    ):
        write_capacity_csv(obj, path, d)
    else:
        raise TypeError(f"no CSV layout for {type(obj).__name__}")


def read_sweep(coverage_path, capacity_path, d: int = 2, fingerprint: str = "") -> SweepResult:
    """Rebuild a sweep from its two CSV files (densities come back per m^d)."""
    groups: OrderedDict = OrderedDict()
    with open(coverage_path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            lam = float(row["lambda"]) / 1000.0**d
            groups.setdefault(lam, []).append(row)
    curves, seed, y_refs = [], 0, None
    for lam, rows in groups.items():
        y = np.array([float(r["y"]) for r in rows])
        p = np.array([float(r["p_hat"]) for r in rows])
        ci = np.array([float(r["ci"]) for r in rows])
        seed = int(rows[0]["seed"])
        y_refs = y if y_refs is None else y_refs
        curves.append(CoverageCurve(y, p, ci, lam, int(rows[0]["trials"]), seed))
    caps = {}
    with open(capacity_path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            lam = float(row["lambda"]) / 1000.0**d
            caps[lam] = CapacityEstimate(
                float(row["c_hat"]), float(row["std_err"]), lam, 0, row["diverged"] == "true"
            )
    lams = np.array(list(groups))
    cap = [caps.get(l) for l in groups]
    cap = [
        c if c is None else CapacityEstimate(c.c_hat, c.std_err, c.lam, cv.trials, c.diverged)
        for c, cv in zip(cap, curves)
    ]
    return SweepResult(lams, np.asarray(y_refs if y_refs is not None else []), curves, cap, fingerprint, seed)


def write_text(text: str, path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
