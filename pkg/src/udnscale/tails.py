"""Tail of the single-node received power P = m / l(r).

Exact CCDF as a finite sum of truncated fading moments, tail classification,
Karamata-type asymptotics for Pareto fading, and empirical counterparts
(empirical CCDF, Hill estimator, KS distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import PathLossModel
from .fading import FadingDistribution, Pareto
from .geometry import NetworkDomain, sample_node_distances
from .tailclass import LIGHTER, RAPID, REGULAR, TailClass

__all__ = [
    "TailClass",
    "TailCurve",
    "UnsupportedCaseError",
    "analytic_tail_p",
    "asymptotic_tail_p",
    "classify_received_power",
    "empirical_ccdf",
    "hill_estimator",
    "ks_distance",
    "sample_received_power",
]

ANALYTIC = "analytic"
EMPIRICAL = "empirical"
ASYMPTOTIC = "asymptotic"


class UnsupportedCaseError(ValueError):
    """The requested asymptotic has no closed form (degenerate index)."""


@dataclass(frozen=True)
class TailCurve:
    t: np.ndarray
    ccdf: np.ndarray
    provenance: str

    def __post_init__(self):
        if self.provenance not in (ANALYTIC, EMPIRICAL, ASYMPTOTIC):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        c = np.asarray(self.ccdf)
        if self.provenance != ASYMPTOTIC:
            if np.any(c < 0) or np.any(c > 1):
                raise ValueError("ccdf values must lie in [0, 1]")
            order = np.argsort(self.t, kind="stable")
            if np.any(np.diff(c[order]) > 1e-12):
                raise ValueError("ccdf must be non-increasing in t")


def _check_domain(model: PathLossModel, domain: NetworkDomain):
    if model.d != domain.d or model.R_inf != domain.R_inf:
        raise ValueError("path loss model was built for a different domain")


def _tail_terms(t: float, model: PathLossModel, f: FadingDistribution, domain: NetworkDomain):
    """tail_m(a_K t) and the list of (k, J_k(t))."""
    a = model.a
    alphas = model.alphas
    logA = model.log_amplitudes
    vol = domain.R_inf**domain.d
    k0 = 1 if model.beta0 == 0 else 0
    head = float(f.ccdf(a[-1] * t))
    terms = []
    for k in range(k0, model.K):
        ak = alphas[k]
        try:
            # (lo, hi] makes the sum exact for atomic fading under Pr(P > t)
            mom = f.truncated_moment(ak, a[k] * t, a[k + 1] * t, right_closed=True)
        except ArithmeticError as exc:
            raise ArithmeticError(f"truncated moment failed for segment k={k}: {exc}") from exc
        if not math.isfinite(mom):
            raise ArithmeticError(f"non-finite truncated moment for segment k={k}")
        if mom == 0.0:
            terms.append((k, 0.0))
            continue
        log_j = math.log(mom) - ak * logA[k] - math.log(vol) - ak * math.log(t)
        terms.append((k, math.exp(log_j)))
    return head, terms


def analytic_tail_p(t, model: PathLossModel, f: FadingDistribution, domain: NetworkDomain):
    """Pr(P > t) for a random node: tail_m(a_K t) + sum_k J_k(t).

    J_k(t) = E(m^alpha_k 1(a_k t < m <= a_{k+1} t)) t^-alpha_k / (A_k^alpha_k R_inf^d),
    with the flat k = 0 segment folded into the boundary terms when beta_0 = 0.
    """
    _check_domain(model, domain)

    def one(tv):
        if not tv > 0:
            raise ValueError(f"threshold must be > 0, got {tv}")
        head, terms = _tail_terms(tv, model, f, domain)
        val = head + sum(j for _, j in terms)
        assert -1e-9 <= val <= 1 + 1e-9, f"tail_P({tv}) = {val} outside [0, 1]"
        return min(max(val, 0.0), 1.0)

    arr = np.asarray(t, dtype=float)
    if arr.ndim == 0:
        return one(float(arr))
    return np.array([one(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def analytic_curve(ts, model, f, domain) -> TailCurve:
    ts = np.asarray(ts, dtype=float)
    return TailCurve(ts, analytic_tail_p(ts, model, f, domain), ANALYTIC)


def classify_received_power(model: PathLossModel, f: FadingDistribution) -> TailClass:
    """Tail class of P from the fading's declared class and the near-field exponent."""
    tc = f.tail_class
    alpha0 = model.alphas[0]  # +inf for a flat near field
    if tc.kind == REGULAR:
        return TailClass.regular(min(alpha0, tc.index))
    if model.beta0 > 0:
        return TailClass.regular(alpha0)
    return tc


def asymptotic_tail_p(t, model: PathLossModel, f: Pareto, domain: NetworkDomain):
    """Leading-order tail of P for Pareto fading as t -> infinity.

    Three cases: flat near field; singular near field whose index alpha_0 is at
    least the fading index; singular near field with alpha_0 below it (the
    t^-alpha_0 term from the full alpha_0-th moment then dominates).
    """
    _check_domain(model, domain)
    if not isinstance(f, Pareto):
        raise TypeError("asymptotic tail is implemented for Pareto fading only")
    alpha = f.alpha
    alphas = model.alphas
    a = model.a
    logA = model.log_amplitudes
    vol = domain.R_inf**domain.d
    for k, ak in enumerate(alphas):
        if ak == alpha:
            raise UnsupportedCaseError(f"fading index {alpha} equals alpha_{k}; the constant is not available")

    def c_k(k):
        ak = alphas[k]
        e = ak - alpha
        lo = a[k] ** e if a[k] > 0 else 0.0
        return alpha * (a[k + 1] ** e - lo) / (e * math.exp(ak * logA[k]) * vol)

    if model.beta0 == 0:
        ks, extra = range(1, model.K), None
    elif alphas[0] >= alpha:
        ks, extra = range(0, model.K), None
    else:
        ks = range(1, model.K)
        extra = f.truncated_moment(alphas[0]) / (math.exp(alphas[0] * logA[0]) * vol)
    coef = a[-1] ** (-alpha) + sum(c_k(k) for k in ks)

    def one(tv):
        slowly = tv**alpha * float(f.ccdf(tv))  # L(t) -> sigma^alpha
        val = coef * slowly * tv ** (-alpha)
        if extra is not None:
            val += extra * tv ** (-alphas[0])
        return val

    arr = np.asarray(t, dtype=float)
    if arr.ndim == 0:
        return one(float(arr))
    return np.array([one(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def sample_received_power(
    n: int, model: PathLossModel, f: FadingDistribution, domain: NetworkDomain, rng: np.random.Generator
) -> np.ndarray:
    """``n`` iid draws of m / l(r) with r from the random-node distance law."""
    r = sample_node_distances(n, domain, rng)
    return f.sample(rng, n) * model.gain(r)


def empirical_ccdf(samples, thresholds) -> TailCurve:
    """Fraction of samples strictly above each threshold."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empirical CCDF of an empty sample")
    t = np.asarray(thresholds, dtype=float)
    above = x.size - np.searchsorted(x, t, side="right")
    return TailCurve(t, above / x.size, EMPIRICAL)


@dataclass(frozen=True)
class HillEstimate:
    alpha: float
    std_err: float
    k: int
    threshold: float


def hill_estimator(samples, k_fraction: float = 0.01) -> HillEstimate:
    """Classical Hill estimate of the tail index from the top k order statistics."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1000:
        raise ValueError(f"Hill estimator needs >= 1000 samples, got {x.size}")
    if not (0 < k_fraction <= 0.2):
        raise ValueError("k_fraction must lie in (0, 0.2]")
    k = max(int(k_fraction * x.size), 2)
    top = np.sort(x)[-(k + 1):]
    u = top[0]
    if not u > 0:
        raise ValueError("Hill estimator needs positive order statistics")
    mean_log = float(np.mean(np.log(top[1:] / u)))
    if mean_log == 0.0:
        raise ValueError("degenerate sample: top order statistics are all equal (index is infinite)")
    est = 1.0 / mean_log
    return HillEstimate(est, est / math.sqrt(k), k, float(u))


def ks_distance(samples, cdf, n_grid: int = 4000) -> float:
    """Upper bound on sup_t |F_n(t) - F(t)| using F only at sample quantiles.

    For t between grid points u_i < u_{i+1} both F_n and F are monotone, so
    |F_n(t) - F(t)| <= max(F_n(u_{i+1}-) - F(u_i), F(u_{i+1}) - F_n(u_i)).
    The bound exceeds the exact statistic by at most one grid cell (~1/n_grid).
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("KS distance of an empty sample")
    idx = np.unique(np.linspace(0, n - 1, n_grid).astype(int))
    u = np.unique(x[idx])
    Fu = np.asarray(cdf(u), dtype=float)
    Fn = np.searchsorted(x, u, side="right") / n
    Fn_left = np.searchsorted(x, u, side="left") / n
    d = np.max(np.maximum(np.abs(Fn - Fu), np.abs(Fn_left - Fu)))
    inner = np.maximum(Fn_left[1:] - Fu[:-1], Fu[1:] - Fn[:-1])
    lower = Fn_left[0]  # below the sample minimum F_n = 0
    upper = 1.0 - Fu[-1]  # above the sample maximum F_n = 1
    return float(max(d, np.max(inner, initial=0.0), lower, upper, Fu[0]))
