"""Poisson-field node distances in a bounded d-dimensional ball around the user."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KM2 = 1.0e6  # m^2 per km^2


def ball_volume(d: int) -> float:
    """Volume of the unit d-ball (2, pi, 4pi/3 for d = 1, 2, 3)."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def per_km2_to_per_m2(lam_km2: float) -> float:
    return lam_km2 / KM2


def per_m2_to_per_km2(lam_m2: float) -> float:
    return lam_m2 * KM2


@dataclass(frozen=True)
class NetworkDomain:
    d: int = 2
    R_inf: float = 40_000.0  # meters

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if not (0.0 < self.R_inf < math.inf):
            raise ValueError(f"R_inf must be finite and > 0, got {self.R_inf}")

    def volume(self, radius: float | None = None) -> float:
        r = self.R_inf if radius is None else radius
        return ball_volume(self.d) * r ** self.d


@dataclass(frozen=True)
class DensityConfig:
    lam: float  # nodes per m^d

    def __post_init__(self):
        if not self.lam >= 0.0:
            raise ValueError(f"density must be >= 0, got {self.lam}")

    @classmethod
    def per_km2(cls, lam_km2: float) -> "DensityConfig":
        return cls(per_km2_to_per_m2(lam_km2))


def distance_cdf(r, domain: NetworkDomain):
    """CDF of the distance from the user to a uniformly chosen node: (r/R_inf)^d, capped at 1."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("distance must be non-negative")
    out = np.minimum(r_arr / domain.R_inf, 1.0) ** domain.d
    return float(out) if out.ndim == 0 else out


def expected_count(density: DensityConfig, domain: NetworkDomain, radius: float | None = None) -> float:
    return density.lam * domain.volume(radius)


def sample_distances(
    density: DensityConfig,
    domain: NetworkDomain,
    rng: np.random.Generator,
    radius: float | None = None,
) -> np.ndarray:
    """Distances of one PPP realization, restricted to the ball of ``radius`` (default R_inf).

    The count is an exact Poisson draw; numpy uses inversion for small means
    and the PTRS rejection sampler for large ones.
    """
    r_max = domain.R_inf if radius is None else min(radius, domain.R_inf)
    n = rng.poisson(density.lam * domain.volume(r_max))
    if n == 0:
        return np.empty(0)
    # 1 - U lies in (0, 1], keeping r > 0 so singular path loss stays finite
    u = 1.0 - rng.random(n)
    return r_max * u ** (1.0 / domain.d)


def sample_node_distances(n: int, domain: NetworkDomain, rng: np.random.Generator) -> np.ndarray:
    """``n`` iid distances from the random-node law (for single-node power sampling)."""
    u = 1.0 - rng.random(n)
    return domain.R_inf * u ** (1.0 / domain.d)
