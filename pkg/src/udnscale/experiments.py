"""Density sweeps, regime detection and optimal-density search."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fading import FadingDistribution
from .channel import PathLossModel
from .geometry import NetworkDomain, per_m2_to_per_km2
from .sinr import (
    CapacityEstimate,
    CoverageCurve,
    SimConfig,
    capacity_from_samples,
    coverage_from_samples,
    sample_sinr,
)
from .streams import stream_key
from .tails import classify_received_power


class Regime(str, enum.Enum):
    GROWTH = "Growth"
    SATURATION = "Saturation"
    INVERSE_U = "InverseU"
    UNCLASSIFIED = "Unclassified"


class PreconditionError(ValueError):
    pass


def predict_regime(model: PathLossModel, f: FadingDistribution, domain: NetworkDomain) -> Regime:
    """Ultra-dense regime implied by the tail class of the single-node received power.

    Index 0 grows, index in (0, 1) saturates, index above 1 or a rapidly varying
    (or lighter) tail gives an interior optimum. Index exactly 1 is left unclassified.
    """
    tc = classify_received_power(model, f)
    if not tc.is_regular:
        regime = Regime.INVERSE_U
    elif tc.index == 0:
        regime = Regime.GROWTH
    elif tc.index < 1:
        regime = Regime.SATURATION
    elif tc.index > 1:
        regime = Regime.INVERSE_U
    else:
        return Regime.UNCLASSIFIED
    # redundant check: a near field steeper than d always saturates
    # unless the fading is heavier than index 1
    ft = f.tail_class
    if model.beta0 > domain.d and (not ft.is_regular or ft.index > 1):
        assert regime is Regime.SATURATION, (regime, tc)
    return regime


def config_fingerprint(cfg: SimConfig) -> str:
    desc = {
        "d": cfg.domain.d,
        "R_inf": cfg.domain.R_inf,
        "breakpoints": list(cfg.model.breakpoints),
        "exponents": list(cfg.model.exponents),
        "log_amplitudes": list(cfg.model.log_amplitudes),
        "fading": cfg.fading.params(),
        "W": cfg.W,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "r_sim": cfg.r_sim,
        "bias_tol": cfg.bias_tol,
        "node_budget": cfg.node_budget,
    }
    blob = json.dumps(desc, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SweepResult:
    """Per-density coverage at the reference thresholds and capacity.

    Densities are per m^d. A failed point has ``None`` in both lists and its
    message in ``errors``. ``samples`` keeps the raw SINR draws when requested.
    """

    lambdas: np.ndarray
    y_refs: np.ndarray
    coverage: list
    capacity: list
    fingerprint: str
    seed: int
    errors: dict = field(default_factory=dict)
    samples: list | None = None

    def ok(self) -> np.ndarray:
        return np.array([c is not None for c in self.coverage], dtype=bool)

    def coverage_at(self, y_ref: float):
        """(lambdas, p_hat, std_err) at the reference threshold closest to ``y_ref``, failed points dropped."""
        j = int(np.argmin(np.abs(np.log(self.y_refs) - math.log(y_ref))))
        keep = self.ok()
        lam = self.lambdas[keep]
        p = np.array([c.p_hat[j] for c in self.coverage if c is not None])
        se = np.array([c.std_err[j] for c in self.coverage if c is not None])
        return lam, p, se

    def capacity_curve(self):
        keep = self.ok()
        c = np.array([e.c_hat for e in self.capacity if e is not None])
        se = np.array([e.std_err for e in self.capacity if e is not None])
        return self.lambdas[keep], c, se


def check_grid(lambdas) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 0) or np.any(np.diff(lam) <= 0):
        raise ValueError("density grid must be non-negative and strictly increasing")
    pos = lam[lam > 0]
    if pos.size < 8:
        raise ValueError(f"density grid needs >= 8 positive points, got {pos.size}")
    steps = np.diff(np.log(pos))
    if not np.allclose(steps, steps[0], rtol=1e-6):
        raise ValueError("density grid must be log-spaced")
    if math.log10(pos[-1] / pos[0]) < 4 - 1e-9:
        raise ValueError("density grid must span at least 4 decades")
    return lam


def run_sweep(cfg: SimConfig, lambda_grid, y_refs, workers=None, keep_samples=False, validate=True) -> SweepResult:
    """Coverage and capacity over a density grid.

    All densities share the substream layout (density index 0), so neighbouring
    points reuse the same underlying uniforms as far as the node counts allow.
    """
    lam = check_grid(lambda_grid) if validate else np.asarray(lambda_grid, dtype=float)
    y_refs = np.asarray(y_refs, dtype=float)
    cov, cap, errors, samples = [], [], {}, []
    for i, lv in enumerate(lam):
        try:
            s = sample_sinr(cfg, float(lv), lam_index=0, workers=workers)
        except (ArithmeticError, ValueError, MemoryError) as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
            cov.append(None)
            cap.append(None)
            samples.append(None)
            continue
        cov.append(coverage_from_samples(s.Y, y_refs, float(lv), cfg.seed))
        cap.append(capacity_from_samples(s.Y, float(lv)))
        samples.append(s.Y if keep_samples else None)
    return SweepResult(
        lam, y_refs, cov, cap, config_fingerprint(cfg), cfg.seed, errors, samples if keep_samples else None
    )


@dataclass(frozen=True)
class Observation:
    regime: Regime
    u_ratio: float
    peak_index: int | None
    reason: str


def _sep(p1, s1, p2, s2):
    """Difference p1 - p2 in units of the combined standard error."""
    s = math.hypot(s1, s2)
    if s == 0:
        return math.inf if p1 > p2 else (0.0 if p1 == p2 else -math.inf)
    return (p1 - p2) / s


def classify_from_curve(lam, p, se, eps=0.02, delta=0.05, u=10.0, z=3.0) -> Observation:
    """Regime decision on a coverage-vs-density curve; rules tried in the order Growth, Saturation, InverseU.

    The ratio test compares the top density with the grid point closest to top/u
    (the grid need not contain that density exactly).
    """
    lam, p, se = (np.asarray(a, dtype=float) for a in (lam, p, se))
    if lam.size < 3:
        return Observation(Regime.UNCLASSIFIED, math.nan, None, "fewer than 3 usable grid points")
    lo = int(np.argmin(np.abs(np.log(lam) - math.log(lam[-1] / u))))
    if lo == lam.size - 1:
        lo -= 1
    ratio = p[-1] / p[lo] if p[lo] > 0 else math.nan
    stat = abs(ratio - 1) if math.isfinite(ratio) else math.inf

    if p[-1] > 1 - eps and p[-1] >= p[-2]:
        return Observation(Regime.GROWTH, stat, None, f"top coverage {p[-1]:.4f} > 1 - eps and increasing")

    overlap = abs(p[-1] - p[lo]) <= 1.959963984540054 * (se[-1] + se[lo])
    away = p[-1] - z * se[-1] > 0
    if stat < delta and overlap and away:
        return Observation(Regime.SATURATION, stat, None, f"|P(top)/P(top/u) - 1| = {stat:.4f} < {delta}")

    interior = range(1, lam.size - 1)
    peak = max(interior, key=lambda j: p[j])
    if (
        _sep(p[peak], se[peak], p[0], se[0]) >= z
        and _sep(p[peak], se[peak], p[-1], se[-1]) >= z
    ):
        return Observation(Regime.INVERSE_U, stat, peak, f"interior peak at grid index {peak}")
    return Observation(
        Regime.UNCLASSIFIED, stat, None, f"no rule fired: ratio stat {stat:.4f}, overlap={overlap}, top={p[-1]:.4f}"
    )


def classify_observed(sweep: SweepResult, y_ref=1.0, eps=0.02, delta=0.05, u=10.0, z=3.0) -> Observation:
    lam, p, se = sweep.coverage_at(y_ref)
    return classify_from_curve(lam, p, se, eps, delta, u, z)


@dataclass(frozen=True)
class OptimalDensity:
    lambda_p: float
    bracket_p: tuple
    lambda_c: float
    bracket_c: tuple


_INVPHI = (math.sqrt(5) - 1) / 2


def _probe_seed(seed: int, tag: str, step: int, probe: int) -> int:
    return stream_key(seed, tag, step, probe) & 0xFFFF_FFFF_FFFF_FFFF


def _golden(objective, lo: float, hi: float, seed: int, tag: str, iters: int, probes: int):
    """Golden-section search for a maximum in log-density on a noisy objective.

    Each comparison runs ``probes`` fresh-seed pairs (both points on the same
    seed) and follows the majority.
    """
    a, b = math.log(lo), math.log(hi)
    for step in range(iters):
        x1 = b - _INVPHI * (b - a)
        x2 = a + _INVPHI * (b - a)
        votes = 0
        for k in range(probes):
            s = _probe_seed(seed, tag, step, k)
            votes += 1 if objective(math.exp(x1), s) >= objective(math.exp(x2), s) else -1
        if votes > 0:
            b = x2
        else:
            a = x1
    return math.exp((a + b) / 2), (math.exp(a), math.exp(b))


def find_optimal_density(
    sweep: SweepResult, cfg: SimConfig, y_ref=1.0, iters=6, probes=3, workers=None, z=3.0
) -> OptimalDensity:
    """Coverage- and capacity-maximizing densities (per m^d) with bracketing intervals.

    Starts from the grid argmax of each curve, brackets it by its grid neighbours
    and refines by golden-section search on fresh simulations.
    """
    obs = classify_observed(sweep, y_ref=y_ref, z=z)
    if obs.regime is not Regime.INVERSE_U:
        raise PreconditionError(f"optimal density needs an InverseU sweep, observed {obs.regime.value}")
    j_ref = int(np.argmin(np.abs(np.log(sweep.y_refs) - math.log(y_ref))))

    def coverage(lv, seed):
        s = sample_sinr(replace(cfg, seed=seed), lv, workers=workers)
        return float(np.mean(s.Y >= sweep.y_refs[j_ref]))

    def capacity(lv, seed):
        s = sample_sinr(replace(cfg, seed=seed), lv, workers=workers)
        return capacity_from_samples(s.Y, lv).c_hat

    lam_p, p, _ = sweep.coverage_at(y_ref)
    lam_c, c, _ = sweep.capacity_curve()
    out = []
    for lam, vals, fn, tag in ((lam_p, p, coverage, "opt-coverage"), (lam_c, c, capacity, "opt-capacity")):
        lam = lam[lam > 0]
        vals = vals[-lam.size:]
        j = int(np.clip(np.argmax(vals), 1, lam.size - 2))
        out.append(_golden(fn, lam[j - 1], lam[j + 1], cfg.seed, tag, iters, probes))
    return OptimalDensity(out[0][0], out[0][1], out[1][0], out[1][1])


@dataclass(frozen=True)
class RegimeReport:
    predicted: Regime
    observed: Regime
    u_ratio: float
    y_ref: float
    lambda_p: float | None = None  # per km^2
    lambda_c: float | None = None
    fingerprint: str = ""
    reason: str = ""

    def to_text(self) -> str:
        rows = [
            ("predicted", self.predicted.value),
            ("observed", self.observed.value),
            ("agree", str(self.predicted is self.observed).lower()),
            ("u_ratio_stat", repr(float(self.u_ratio))),
            ("y_ref", repr(float(self.y_ref))),
            ("lambda_p_per_km2", "" if self.lambda_p is None else repr(float(self.lambda_p))),
            ("lambda_c_per_km2", "" if self.lambda_c is None else repr(float(self.lambda_c))),
            ("fingerprint", self.fingerprint),
            ("reason", self.reason.replace("\n", " ")),
        ]
        return "".join(f"{k}={v}\n" for k, v in rows)

    @classmethod
    def from_text(cls, text: str) -> "RegimeReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)

        def opt(key):
            return float(kv[key]) if kv.get(key) else None

        return cls(
            Regime(kv["predicted"]),
            Regime(kv["observed"]),
            float(kv["u_ratio_stat"]),
            float(kv["y_ref"]),
            opt("lambda_p_per_km2"),
            opt("lambda_c_per_km2"),
            kv.get("fingerprint", ""),
            kv.get("reason", ""),
        )


def regime_report(
    cfg: SimConfig, sweep: SweepResult, y_ref=1.0, eps=0.02, delta=0.05, u=10.0, z=3.0, optimize=False, workers=None
) -> RegimeReport:
    pred = predict_regime(cfg.model, cfg.fading, cfg.domain)
    obs = classify_observed(sweep, y_ref, eps, delta, u, z)
    lp = lc = None
    if obs.regime is Regime.INVERSE_U:
        if optimize:
            opt = find_optimal_density(sweep, cfg, y_ref, workers=workers, z=z)
            lp, lc = opt.lambda_p, opt.lambda_c
        else:
            lam, p, _ = sweep.coverage_at(y_ref)
            lamc, c, _ = sweep.capacity_curve()
            lp, lc = lam[obs.peak_index], lamc[int(np.argmax(c))]
        lp, lc = per_m2_to_per_km2(lp), per_m2_to_per_km2(lc)
    return RegimeReport(pred, obs.regime, obs.u_ratio, y_ref, lp, lc, sweep.fingerprint, obs.reason)


__all__ = [
    "CapacityEstimate",
    "CoverageCurve",
    "Observation",
    "OptimalDensity",
    "PreconditionError",
    "Regime",
    "RegimeReport",
    "SweepResult",
    "check_grid",
    "classify_from_curve",
    "classify_observed",
    "config_fingerprint",
    "find_optimal_density",
    "predict_regime",
    "regime_report",
    "run_sweep",
]
