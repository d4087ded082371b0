"""Fading laws for the lumped gain m (transmit power, fast fading, shadowing).

Each law exposes a vectorized sampler, its CCDF, its density, truncated
moments E(m^p 1(lo <= m < hi)) and the tail class it belongs to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .tailclass import LIGHTER_THAN_RAPID, RAPIDLY_VARYING, TailClass

DB = math.log(10.0) / 10.0  # natural-log units per dB
EPSREL = 1e-10


class DivergentMomentError(ArithmeticError):
    """The requested moment is infinite."""


class AtomicDistributionError(ValueError):
    """The law has an atom and therefore no density."""


def _check_moment_args(p, lo, hi):
    if p < 0:
        raise ValueError(f"moment exponent must be >= 0, got {p}")
    if not (0 <= lo <= hi):
        raise ValueError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")


def _normal_interval(a, b):
    """Phi(b) - Phi(a) without cancellation in either tail."""
    if a > 0:
        return special.ndtr(-a) - special.ndtr(-b)
    return special.ndtr(b) - special.ndtr(a)


def _gamma_interval(a, x0, x1):
    """P(a, x1) - P(a, x0) for the regularized lower incomplete gamma."""
    if x0 > a:
        return special.gammaincc(a, x0) - (special.gammaincc(a, x1) if math.isfinite(x1) else 0.0)
    return (special.gammainc(a, x1) if math.isfinite(x1) else 1.0) - special.gammainc(a, x0)


def quad_moment(density, p, lo, hi, scale=1.0, points=()):
    """E(m^p 1(lo <= m < hi)) by adaptive Gauss-Kronrod on log-spaced panels.

    Heavy-tailed integrands put their mass over many decades, so the range is
    cut into panels of ratio e^2 and each panel is integrated separately.
    """
    _check_moment_args(p, lo, hi)
    if lo == hi:
        return 0.0

    def f(x):
        return x**p * density(x) if x > 0 else (density(0.0) if p == 0 else 0.0)

    floor = scale * 1e-12
    edges = []
    if lo < floor:
        edges.append(lo)
        start = floor
    else:
        start = lo
    top = hi if math.isfinite(hi) else max(start, scale) * 1e8
    n = max(1, int(math.ceil(math.log(top / start) / 2.0)))
    edges.extend(np.geomspace(start, top, n + 1).tolist())
    for x in points:
        if edges[0] < x < edges[-1]:
            edges.append(float(x))
    edges = sorted(set(edges))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=EPSREL, limit=200)
        total += val
    if not math.isfinite(hi):
        # keep adding decades until a whole decade is negligible
        a = top
        while True:
            b = a * 10.0
            if b > 1e250:
                raise DivergentMomentError(f"E(m^{p}) does not converge numerically")
            try:
                val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=EPSREL, limit=200)
            except OverflowError as exc:
                raise DivergentMomentError(f"E(m^{p}) overflows") from exc
            total += val
            a = b
            if val <= 1e-15 * total:
                break
    return total


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _panel_sum(h, a, b, n):
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    z = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    with np.errstate(over="ignore", under="ignore"):
        vals = np.asarray(h(z), dtype=float) * np.exp(-0.5 * z * z)
    return float(np.sum(vals.reshape(n, -1) * _GL_W[None, :] * half[:, None]))


def gauss_expectation(h, zmax=40.0):
    """E(h(Z)) for standard normal Z and non-negative vectorized h.

    The integrand is first located on a coarse grid, then integrated with
    composite 24-point Gauss-Legendre, doubling the panel count until two
    successive sums agree to 1e-11.
    """
    z = np.linspace(-zmax, zmax, 1601)
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        logv = np.log(np.asarray(h(z), dtype=float)) - 0.5 * z * z
    finite = np.isfinite(logv)
    if not np.any(finite):
        return 0.0
    top = np.max(logv[finite])
    keep = np.nonzero(finite & (logv > top - 60.0))[0]
    a = z[max(keep[0] - 1, 0)]
    b = z[min(keep[-1] + 1, len(z) - 1)]
    n = max(4, int(math.ceil(b - a)))
    prev = _panel_sum(h, a, b, n)
    for _ in range(6):
        n *= 2
        cur = _panel_sum(h, a, b, n)
        if abs(cur - prev) <= 1e-11 * abs(cur):
            break
        prev = cur
    return cur / math.sqrt(2.0 * math.pi)


class FadingDistribution:
    kind = "abstract"

    @property
    def tail_class(self) -> TailClass:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def ccdf(self, x):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        """E(m^p 1(lo <= m < hi)); ``right_closed`` selects lo < m <= hi (matters only for atoms)."""
        _check_moment_args(p, lo, hi)
        return quad_moment(self.density, p, lo, hi, self.scale)

    def mean(self) -> float:
        return self.truncated_moment(1.0)

    @property
    def scale(self) -> float:
        return 1.0

    def params(self) -> dict:
        raise NotImplementedError


def _vec(fun, x):
    arr = np.asarray(x, dtype=float)
    out = np.vectorize(fun, otypes=[float])(arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Constant(FadingDistribution):
    c: float = 1.0
    kind = "constant"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("constant fading must be > 0")

    @property
    def tail_class(self):
        return LIGHTER_THAN_RAPID

    @property
    def scale(self):
        return self.c

    def sample(self, rng, size):
        return np.full(size, self.c)

    def ccdf(self, x):
        out = (np.asarray(x, dtype=float) < self.c).astype(float)
        return float(out) if out.ndim == 0 else out

    def density(self, x):
        raise AtomicDistributionError("constant fading is an atom at c and has no density")

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        _check_moment_args(p, lo, hi)
        inside = (lo < self.c <= hi) if right_closed else (lo <= self.c < hi)
        return self.c**p if inside else 0.0

    def mean(self):
        return self.c

    def params(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class Gamma(FadingDistribution):
    shape: float = 1.0
    theta: float = 1.0
    kind = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.theta > 0):
            raise ValueError("gamma shape and scale must be > 0")

    @property
    def tail_class(self):
        return RAPIDLY_VARYING

    @property
    def scale(self):
        return self.shape * self.theta

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.theta, size)

    def ccdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        out = special.gammaincc(self.shape, x / self.theta)
        return float(out) if out.ndim == 0 else out

    def density(self, x):
        x = np.asarray(x, dtype=float)
        k, th = self.shape, self.theta
        with np.errstate(divide="ignore"):
            logf = (k - 1) * np.log(x) - x / th - special.gammaln(k) - k * math.log(th)
        out = np.where(x < 0, 0.0, np.exp(logf))
        if k == 1:
            out = np.where(x == 0, 1.0 / th, out)
        return float(out) if out.ndim == 0 else out

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        _check_moment_args(p, lo, hi)
        k, th = self.shape, self.theta
        coef = math.exp(p * math.log(th) + special.gammaln(k + p) - special.gammaln(k))
        return coef * _gamma_interval(k + p, lo / th, hi / th)

    def mean(self):
        return self.shape * self.theta

    def params(self):
        return {"kind": self.kind, "shape": self.shape, "scale": self.theta}


@dataclass(frozen=True)
class RayleighPower(Gamma):
    """Exponential power gain (Rayleigh amplitude) with the given mean."""

    mean_power: float = 1.0
    shape: float = field(default=1.0, init=False)
    theta: float = field(default=1.0, init=False)
    kind = "rayleigh"

    def __post_init__(self):
        if not self.mean_power > 0:
            raise ValueError("mean power must be > 0")
        object.__setattr__(self, "theta", float(self.mean_power))

    def sample(self, rng, size):
        return self.mean_power * rng.standard_exponential(size)

    def ccdf(self, x):
        out = np.exp(-np.maximum(np.asarray(x, dtype=float), 0.0) / self.mean_power)
        return float(out) if out.ndim == 0 else out

    def params(self):
        return {"kind": self.kind, "mean": self.mean_power}


@dataclass(frozen=True)
class Lognormal(FadingDistribution):
    """m = 10^(X/10) with X ~ N(mu_db, sigma_db^2)."""

    sigma_db: float = 8.0
    mu_db: float = 0.0
    kind = "lognormal"

    def __post_init__(self):
        if not self.sigma_db > 0:
            raise ValueError("sigma_db must be > 0")

    @property
    def s(self):
        return self.sigma_db * DB

    @property
    def mu(self):
        return self.mu_db * DB

    @property
    def tail_class(self):
        return RAPIDLY_VARYING

    @property
    def scale(self):
        return math.exp(self.mu)

    def sample(self, rng, size):
        return np.exp(self.mu + self.s * rng.standard_normal(size))

    def ccdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.mu) / self.s
        out = special.ndtr(-z)
        return float(out) if out.ndim == 0 else out

    def density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(x) - self.mu) / self.s
            out = np.where(x > 0, np.exp(-0.5 * z * z) / (x * self.s * math.sqrt(2 * math.pi)), 0.0)
        return float(out) if out.ndim == 0 else out

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        _check_moment_args(p, lo, hi)
        mu, s = self.mu, self.s
        za = (math.log(lo) - mu - p * s * s) / s if lo > 0 else -math.inf
        zb = (math.log(hi) - mu - p * s * s) / s if math.isfinite(hi) else math.inf
        return math.exp(p * mu + 0.5 * p * p * s * s) * _normal_interval(za, zb)

    def mean(self):
        return math.exp(self.mu + 0.5 * self.s**2)

    def params(self):
        return {"kind": self.kind, "sigma_db": self.sigma_db, "mu_db": self.mu_db}


@dataclass(frozen=True)
class Pareto(FadingDistribution):
    """Lomax law with CCDF (1 + x/sigma)^-alpha."""

    alpha: float = 1.0
    sigma: float = 1.0
    kind = "pareto"

    def __post_init__(self):
        if not (self.alpha > 0 and self.sigma > 0):
            raise ValueError("pareto alpha and sigma must be > 0")

    @property
    def tail_class(self):
        return TailClass.regular(self.alpha)

    @property
    def scale(self):
        return self.sigma

    def sample(self, rng, size):
        return self.sigma * rng.pareto(self.alpha, size)

    def ccdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        out = np.exp(-self.alpha * np.log1p(x / self.sigma))
        return float(out) if out.ndim == 0 else out

    def density(self, x):
        x = np.asarray(x, dtype=float)
        a, s = self.alpha, self.sigma
        out = np.where(x < 0, 0.0, a / s * np.exp(-(a + 1) * np.log1p(np.maximum(x, 0.0) / s)))
        return float(out) if out.ndim == 0 else out

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        _check_moment_args(p, lo, hi)
        a, s = self.alpha, self.sigma
        if not math.isfinite(hi) and p >= a:
            raise DivergentMomentError(f"E(m^{p}) is infinite for Pareto index {a}")
        b = a - p
        if b <= 0:
            return quad_moment(self.density, p, lo, hi, s)
        # substituting w = x/(sigma + x) gives alpha sigma^p B(w; p+1, alpha-p)
        coef = a * math.exp(p * math.log(s) + special.betaln(p + 1, b))
        if lo > s:
            # upper-tail form: I_w(a, b) = 1 - I_{1-w}(b, a), 1 - w = sigma/(sigma + x)
            v_lo = special.betainc(b, p + 1, s / (s + lo))
            v_hi = special.betainc(b, p + 1, s / (s + hi)) if math.isfinite(hi) else 0.0
            return coef * (v_lo - v_hi)
        w_lo = lo / (s + lo)
        w_hi = hi / (s + hi) if math.isfinite(hi) else 1.0
        return coef * (special.betainc(p + 1, b, w_hi) - special.betainc(p + 1, b, w_lo))

    def mean(self):
        if self.alpha <= 1:
            return math.inf
        return self.sigma / (self.alpha - 1)

    def params(self):
        return {"kind": self.kind, "alpha": self.alpha, "sigma": self.sigma}


@dataclass(frozen=True)
class Composite(FadingDistribution):
    """Unit-mean exponential power times a lognormal shadowing power."""

    sigma_db: float = 8.0
    mu_db: float = 0.0
    kind = "composite"

    def __post_init__(self):
        if not self.sigma_db > 0:
            raise ValueError("sigma_db must be > 0")

    @property
    def s(self):
        return self.sigma_db * DB

    @property
    def mu(self):
        return self.mu_db * DB

    @property
    def tail_class(self):
        return RAPIDLY_VARYING

    @property
    def scale(self):
        return math.exp(self.mu)

    def sample(self, rng, size):
        e = rng.standard_exponential(size)
        return e * np.exp(self.mu + self.s * rng.standard_normal(size))

    def _shadow(self, z):
        return np.exp(self.mu + self.s * z)

    def ccdf(self, x):
        def one(v):
            if v <= 0:
                return 1.0
            return gauss_expectation(lambda z: np.exp(-v / self._shadow(z)))

        return _vec(one, x)

    def density(self, x):
        def one(v):
            if v < 0:
                return 0.0
            return gauss_expectation(lambda z: np.exp(-v / self._shadow(z)) / self._shadow(z))

        return _vec(one, x)

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        _check_moment_args(p, lo, hi)
        if lo == hi:
            return 0.0
        g = math.gamma(p + 1.0)

        def h(z):
            L = self._shadow(np.asarray(z, dtype=float))
            a = np.atleast_1d(lo / L)
            b = np.atleast_1d(hi / L) if math.isfinite(hi) else np.full_like(a, np.inf)
            upper = a > p + 1.0
            with np.errstate(invalid="ignore"):
                diff = np.where(
                    upper,
                    special.gammaincc(p + 1.0, a) - np.where(np.isfinite(b), special.gammaincc(p + 1.0, b), 0.0),
                    np.where(np.isfinite(b), special.gammainc(p + 1.0, b), 1.0) - special.gammainc(p + 1.0, a),
                )
            out = g * np.atleast_1d(L) ** p * diff
            return out if np.ndim(z) else out[0]

        return gauss_expectation(h)

    def mean(self):
        return math.exp(self.mu + 0.5 * self.s**2)

    def params(self):
        return {"kind": self.kind, "sigma_db": self.sigma_db, "mu_db": self.mu_db}


@dataclass(frozen=True)
class Truncated(FadingDistribution):
    """``base`` conditioned on m <= cap."""

    base: FadingDistribution = field(default_factory=RayleighPower)
    cap: float = 1.0
    kind = "truncated"

    def __post_init__(self):
        if isinstance(self.base, (Constant, Truncated)):
            raise ValueError("truncation needs a continuous, untruncated base law")
        if not self.cap > 0:
            raise ValueError("cap must be > 0")
        if not self.mass > 0:
            raise ValueError("cap leaves no probability mass")

    @property
    def mass(self) -> float:
        return 1.0 - float(self.base.ccdf(self.cap))

    @property
    def tail_class(self):
        return LIGHTER_THAN_RAPID

    @property
    def scale(self):
        return min(self.base.scale, self.cap)

    def sample(self, rng, size):
        n = int(np.prod(size)) if np.ndim(size) else int(size)
        out = np.empty(0)
        while out.size < n:
            need = n - out.size
            draw = self.base.sample(rng, int(need / self.mass * 1.1) + 16)
            out = np.concatenate([out, draw[draw <= self.cap]])
        return out[:n].reshape(size)

    def ccdf(self, x):
        x = np.asarray(x, dtype=float)
        tail_cap = float(self.base.ccdf(self.cap))
        out = np.where(x < self.cap, (self.base.ccdf(np.minimum(x, self.cap)) - tail_cap) / self.mass, 0.0)
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= self.cap, self.base.density(np.minimum(x, self.cap)) / self.mass, 0.0)
        return float(out) if out.ndim == 0 else out

    def truncated_moment(self, p, lo=0.0, hi=math.inf, right_closed=False):
        _check_moment_args(p, lo, hi)
        hi_c = min(hi, self.cap)
        if hi_c <= lo:
            return 0.0
        return self.base.truncated_moment(p, lo, hi_c) / self.mass

    def mean(self):
        return self.truncated_moment(1.0)

    def params(self):
        return {"kind": self.kind, "cap": self.cap, "base": self.base.params()}


KINDS = {
    "constant": (Constant, {"c": "c"}),
    "rayleigh": (RayleighPower, {"mean": "mean_power"}),
    "lognormal": (Lognormal, {"sigma_db": "sigma_db", "mu_db": "mu_db"}),
    "gamma": (Gamma, {"shape": "shape", "scale": "theta"}),
    "pareto": (Pareto, {"alpha": "alpha", "sigma": "sigma"}),
    "composite": (Composite, {"sigma_db": "sigma_db", "mu_db": "mu_db"}),
}


def fading_from_dict(spec: dict) -> FadingDistribution:
    """Inverse of ``FadingDistribution.params()``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "truncated":
        if "base" not in spec or "cap" not in spec:
            raise ValueError("truncated fading needs 'base' and 'cap'")
        return Truncated(fading_from_dict(spec["base"]), float(spec["cap"]))
    if kind not in KINDS:
        raise ValueError(f"unknown fading kind {kind!r}; expected one of {sorted([*KINDS, 'truncated'])}")
    cls, names = KINDS[kind]
    unknown = set(spec) - set(names)
    if unknown:
        raise ValueError(f"unknown parameters for {kind} fading: {sorted(unknown)}")
    return cls(**{names[k]: float(v) for k, v in spec.items()})


def sample_fading(f: FadingDistribution, rng: np.random.Generator, size=None):
    if size is None:
        return float(f.sample(rng, 1)[0])
    return f.sample(rng, size)


def fading_ccdf(f: FadingDistribution, x):
    return f.ccdf(x)


def fading_density(f: FadingDistribution, x):
    return f.density(x)


def truncated_moment(f: FadingDistribution, p, lo=0.0, hi=math.inf):
    return f.truncated_moment(p, lo, hi)
