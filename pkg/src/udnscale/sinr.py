"""Monte Carlo SINR under strongest-cell association.

Per realization: PPP distances, iid fading, P_i = m_i / l(r_i),
M = max P_i, I = sum P_i and Y = M / (I + W - M).
Densities are per m^d here; conversion from per-km^2 happens at the config layer.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import PathLossModel, gain_volume_integral
from .fading import FadingDistribution
from .geometry import DensityConfig, NetworkDomain, sample_distances
from .streams import substream

Z95 = 1.959963984540054
WORKERS_ENV = "UDNSCALE_WORKERS"


@dataclass(frozen=True)
class SimConfig:
    domain: NetworkDomain
    model: PathLossModel
    fading: FadingDistribution
    W: float = 0.0
    trials: int = 10_000
    seed: int = 0
    r_sim: object = "auto"  # "auto", None for no truncation, or a radius in meters
    bias_tol: float = 1e-3
    node_budget: int = 20_000
    block: int = 250  # realizations per work unit; part of the stream layout, not of the schedule

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.W >= 0:
            raise ValueError("noise power W must be >= 0")
        if self.model.d != self.domain.d or self.model.R_inf != self.domain.R_inf:
            raise ValueError("path loss model was built for a different domain")
        if not (self.r_sim in ("auto", None) or (isinstance(self.r_sim, (int, float)) and self.r_sim > 0)):
            raise ValueError(f"r_sim must be 'auto', None or a positive radius, got {self.r_sim!r}")


@dataclass(frozen=True)
class RealizationResult:
    M: float
    I: float
    Y: float
    n_nodes: int


@dataclass(frozen=True)
class Truncation:
    """Simulation radius and the mean far-field interference it drops.

    ``rel_bias`` is E(I beyond r_sim) / E(I within r_sim). When the near field
    has infinite mean interference the denominator only counts nodes beyond the
    typical nearest-neighbour distance. It is inf when the fading mean is infinite.
    """

    r_sim: float
    rel_bias: float
    expected_nodes: float


@dataclass(frozen=True)
class SinrSample:
    M: np.ndarray
    I: np.ndarray
    Y: np.ndarray
    n_nodes: np.ndarray
    lam: float
    truncation: Truncation
    seed: int

    @property
    def trials(self) -> int:
        return self.Y.size


@dataclass(frozen=True)
class CoverageCurve:
    y_grid: np.ndarray
    p_hat: np.ndarray
    ci_halfwidth: np.ndarray
    lam: float
    trials: int
    seed: int

    @property
    def std_err(self) -> np.ndarray:
        return self.ci_halfwidth / Z95


@dataclass(frozen=True)
class CapacityEstimate:
    c_hat: float
    std_err: float
    lam: float
    trials: int
    diverged: bool = False
    n_infinite: int = 0


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, int(workers))


def far_field_ratio(model: PathLossModel, r: float, r_core: float = 0.0) -> float:
    """E(I from r < |x| <= R_inf) / E(I from r_core < |x| <= r); fading mean cancels."""
    near = gain_volume_integral(model, min(r_core, r), r)
    if math.isinf(near):
        return 0.0
    if near == 0.0:
        return math.inf
    return gain_volume_integral(model, r, model.R_inf) / near


def nearest_neighbour_radius(domain: NetworkDomain, lam: float) -> float:
    """Radius of the ball holding one node on average."""
    return (1.0 / (lam * domain.volume(1.0))) ** (1.0 / domain.d)


def bias_radius(model: PathLossModel, tol: float) -> float:
    """Smallest radius whose dropped mean interference is below ``tol`` of the kept part."""
    hi = model.R_inf
    if far_field_ratio(model, hi * 1e-9) <= tol:
        return 0.0
    lo = hi * 1e-9
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if far_field_ratio(model, mid) <= tol:
            hi = mid
        else:
            lo = mid
        if hi / lo < 1 + 1e-9:
            break
    return hi


def sim_radius(cfg: SimConfig, lam: float) -> Truncation:
    """Truncation radius for density ``lam`` (per m^d).

    With ``r_sim='auto'`` the whole domain is simulated while the expected node
    count fits the budget. Beyond that the radius is the larger of the budget
    radius and the radius meeting the relative far-field bias tolerance. That
    tolerance is only enforceable when the near field has finite mean
    interference; otherwise the budget radius is used and the bias reported.
    """
    dom = cfg.domain
    if cfg.r_sim is None:
        r = dom.R_inf
    elif cfg.r_sim == "auto":
        if lam * dom.volume() <= cfg.node_budget:
            r = dom.R_inf
        else:
            r_budget = (cfg.node_budget / (lam * dom.volume(1.0))) ** (1.0 / dom.d)
            finite = math.isfinite(cfg.fading.mean()) and math.isfinite(gain_volume_integral(cfg.model, 0.0, 1.0))
            r_bias = bias_radius(cfg.model, cfg.bias_tol) if finite else 0.0
            r = min(dom.R_inf, max(r_budget, r_bias))
    else:
        r = min(float(cfg.r_sim), dom.R_inf)
    if r >= dom.R_inf:
        rel = 0.0
    elif math.isinf(cfg.fading.mean()):
        rel = math.inf
    else:
        core = 0.0
        if math.isinf(gain_volume_integral(cfg.model, 0.0, r)):
            core = nearest_neighbour_radius(dom, lam)
        rel = far_field_ratio(cfg.model, r, core)
    return Truncation(r, rel, lam * dom.volume(r))


def sinr_from_powers(powers, W: float) -> RealizationResult:
    p = np.array(powers, dtype=float)
    n = p.size
    if n == 0:
        return RealizationResult(0.0, 0.0, 0.0, 0)
    j = int(np.argmax(p))
    M = float(p[j])
    p[j] = 0.0
    rest = float(p.sum())  # I - M without cancellation
    denom = rest + W
    if denom > 0:
        Y = M / denom
    else:
        Y = math.inf if M > 0 else 0.0
    return RealizationResult(M, M + rest, Y, n)


def _one(cfg: SimConfig, lam: float, radius: float, rng: np.random.Generator) -> RealizationResult:
    r = sample_distances(DensityConfig(lam), cfg.domain, rng, radius)
    if r.size == 0:
        return RealizationResult(0.0, 0.0, 0.0, 0)
    p = cfg.fading.sample(rng, r.size) * cfg.model.gain(r)
    return sinr_from_powers(p, cfg.W)


def simulate_realization(cfg: SimConfig, lam: float, index: int, lam_index: int = 0) -> RealizationResult:
    """Realization ``index`` at density ``lam``; depends only on (seed, lam_index, index)."""
    radius = sim_radius(cfg, lam).r_sim
    return _one(cfg, lam, radius, substream(cfg.seed, "sinr", lam_index, index))


def _block(args):
    cfg, lam, radius, lam_index, start, stop = args
    out = np.empty((stop - start, 4))
    for row, i in enumerate(range(start, stop)):
        res = _one(cfg, lam, radius, substream(cfg.seed, "sinr", lam_index, i))
        out[row] = (res.M, res.I, res.Y, res.n_nodes)
    return out


def sample_sinr(
    cfg: SimConfig, lam: float, lam_index: int = 0, trials: int | None = None, workers: int | None = None
) -> SinrSample:
    """Run ``trials`` realizations; identical output for any worker count."""
    trials = cfg.trials if trials is None else trials
    trunc = sim_radius(cfg, lam)
    tasks = [
        (cfg, lam, trunc.r_sim, lam_index, s, min(s + cfg.block, trials)) for s in range(0, trials, cfg.block)
    ]
    workers = resolve_workers(workers)
    if workers == 1 or len(tasks) == 1:
        parts = [_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block, tasks))
    arr = np.concatenate(parts) if parts else np.empty((0, 4))
    return SinrSample(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3].astype(np.int64), lam, trunc, cfg.seed)


def coverage_from_samples(Y, y_grid, lam: float, seed: int = 0) -> CoverageCurve:
    y_grid = np.asarray(y_grid, dtype=float)
    if np.any(np.diff(y_grid) < 0) or np.any(y_grid <= 0):
        raise ValueError("y grid must be positive and ascending")
    Y = np.sort(np.asarray(Y, dtype=float))
    n = Y.size
    p = (n - np.searchsorted(Y, y_grid, side="left")) / n  # Pr(Y >= y)
    ci = Z95 * np.sqrt(p * (1 - p) / n)
    return CoverageCurve(y_grid, p, ci, lam, n, seed)


def estimate_coverage(cfg: SimConfig, lam: float, y_grid, lam_index: int = 0, workers=None) -> CoverageCurve:
    """Pr(Y >= y) on a threshold grid from one shared set of realizations."""
    s = sample_sinr(cfg, lam, lam_index, workers=workers)
    return coverage_from_samples(s.Y, y_grid, lam, cfg.seed)


def capacity_from_samples(Y, lam: float) -> CapacityEstimate:
    Y = np.asarray(Y, dtype=float)
    finite = np.isfinite(Y)
    n_inf = int(Y.size - finite.sum())
    vals = np.log1p(Y[finite])
    c = float(vals.mean()) if vals.size else 0.0
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return CapacityEstimate(c, se, lam, int(Y.size), n_inf > 0, n_inf)


def estimate_capacity(cfg: SimConfig, lam: float, lam_index: int = 0, workers=None) -> CapacityEstimate:
    """E(ln(1 + Y)) in nats/s/Hz; infinite-SINR realizations (W = 0) set ``diverged``."""
    s = sample_sinr(cfg, lam, lam_index, workers=workers)
    return capacity_from_samples(s.Y, lam)


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple:
    from scipy.stats import beta

    a = 1 - level
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def coverage_integral(Y, y_grid) -> tuple:
    """Integral of the estimated coverage curve against dy/(1+y), with its standard error.

    Trapezoid rule in ln y over the grid; below the grid the curve is held flat,
    above it a power law fitted to the last two positive points is integrated
    exactly. The standard error linearizes the estimator in the indicators
    1(Y_i >= y_j) with the fitted exponent held fixed.
    """
    y = np.asarray(y_grid, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    Ys = np.sort(Y)
    p = (n - np.searchsorted(Ys, y, side="left")) / n
    u = np.log(y)
    kern = y / (1.0 + y)  # dy/(1+y) = y/(1+y) du
    w = np.zeros_like(y)
    du = np.diff(u)
    w[:-1] += 0.5 * du * kern[:-1]
    w[1:] += 0.5 * du * kern[1:]
    w[0] += math.log1p(y[0])  # flat closure on [0, y_1]
    upper = 0.0
    pos = np.nonzero(p > 0)[0]
    if p[-1] > 0 and pos.size >= 2:
        j1, j2 = pos[-2], pos[-1]
        gamma = max(math.log(p[j1] / p[j2]) / math.log(y[j2] / y[j1]), 0.05)
        yJ = y[-1]
        # int_{yJ}^inf (v/yJ)^-gamma dv/(1+v) in closed form
        upper = float(special.hyp2f1(1.0, gamma, gamma + 1.0, -1.0 / yJ)) / gamma
        w[-1] += upper
    value = float(np.dot(w, p))
    # per-realization contribution: sum of w_j over grid points with y_j <= Y_i
    cw = np.concatenate([[0.0], np.cumsum(w)])
    g = cw[np.searchsorted(y, Y, side="right")]
    se = float(g.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return value, se
