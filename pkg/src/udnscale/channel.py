"""Multi-slope path loss l(r) = A_k r^beta_k on [R_k, R_{k+1})."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import NetworkDomain, ball_volume


class PathLossError(ValueError):
    """Invalid path loss parameters; ``condition`` names the violated constraint."""

    def __init__(self, condition: str, message: str):
        super().__init__(f"[{condition}] {message}")
        self.condition = condition


@dataclass(frozen=True)
class PathLossModel:
    breakpoints: tuple  # R_0 = 0 < R_1 < ... < R_K = R_inf
    exponents: tuple  # beta_0 .. beta_{K-1}
    log_amplitudes: tuple  # ln A_0 .. ln A_{K-1}
    d: int

    def __post_init__(self):
        _validate(self.breakpoints, self.exponents, self.d)
        if len(self.log_amplitudes) != self.K:
            raise PathLossError("4", "need one amplitude per slope")
        for k in range(self.K - 1):
            R = self.breakpoints[k + 1]
            left = self.log_amplitudes[k] + self.exponents[k] * math.log(R)
            right = self.log_amplitudes[k + 1] + self.exponents[k + 1] * math.log(R)
            # relative mismatch of A_k R^b_k vs A_{k+1} R^b_{k+1}
            if abs(math.expm1(left - right)) > 1e-12:
                raise PathLossError("4", f"discontinuity at R_{k + 1} = {R}")

    @property
    def K(self) -> int:
        return len(self.exponents)

    @property
    def R_inf(self) -> float:
        return self.breakpoints[-1]

    @property
    def amplitudes(self) -> tuple:
        return tuple(math.exp(v) for v in self.log_amplitudes)

    @property
    def beta0(self) -> float:
        return self.exponents[0]

    @property
    def alphas(self) -> tuple:
        """d / beta_k, with +inf for a flat segment."""
        return tuple(math.inf if b == 0 else self.d / b for b in self.exponents)

    @property
    def a(self) -> tuple:
        """Path loss at the breakpoints: a_0..a_K (a_0 = 0 when beta_0 > 0)."""
        out = [math.exp(self.log_amplitudes[0]) if self.beta0 == 0 else 0.0]
        for k in range(1, self.K):
            out.append(math.exp(self.log_amplitudes[k] + self.exponents[k] * math.log(self.breakpoints[k])))
        out.append(
            math.exp(self.log_amplitudes[-1] + self.exponents[-1] * math.log(self.R_inf))
        )
        return tuple(out)

    def segment(self, r: np.ndarray) -> np.ndarray:
        inner = np.asarray(self.breakpoints[1:-1])
        return np.searchsorted(inner, r, side="right")

    def log_loss(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        k = self.segment(r)
        la = np.asarray(self.log_amplitudes)[k]
        b = np.asarray(self.exponents)[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.where(b == 0, 0.0, b * np.log(r))
        return la + lr

    def gain(self, r) -> np.ndarray:
        """1 / l(r), vectorized, no range check (hot path of the simulator)."""
        return np.exp(-self.log_loss(r))


def _validate(breakpoints, exponents, d):
    K = len(exponents)
    if K < 1:
        raise PathLossError("1", "need at least one slope")
    if len(breakpoints) != K + 1:
        raise PathLossError("2", f"expected {K + 1} breakpoints R_0..R_K, got {len(breakpoints)}")
    if breakpoints[0] != 0:
        raise PathLossError("2", "R_0 must be 0")
    for k in range(K):
        if not breakpoints[k] < breakpoints[k + 1]:
            raise PathLossError(
                "2", f"breakpoints must increase strictly: R_{k} = {breakpoints[k]} >= R_{k + 1} = {breakpoints[k + 1]}"
            )
    if not math.isfinite(breakpoints[-1]):
        raise PathLossError("2", "R_K = R_inf must be finite")
    if exponents[0] < 0:
        raise PathLossError("3a", f"beta_0 = {exponents[0]} must be >= 0")
    for k in range(1, K):
        if exponents[k] < d - 1:
            raise PathLossError("3b", f"beta_{k} = {exponents[k]} < d-1 = {d - 1}")
    for k in range(K - 1):
        if not exponents[k] < exponents[k + 1]:
            raise PathLossError("3c", f"beta_{k} = {exponents[k]} must be < beta_{k + 1} = {exponents[k + 1]}")


def build_pathloss(A0: float, exponents, breakpoints, domain: NetworkDomain) -> PathLossModel:
    """Build a continuous K-slope model from the anchor A_0.

    ``breakpoints`` may be the interior points R_1..R_{K-1} or the full list
    R_0..R_K; R_K must then equal the domain radius.
    """
    exponents = tuple(float(b) for b in exponents)
    K = len(exponents)
    bps = [float(x) for x in breakpoints]
    if len(bps) == K - 1:
        bps = [0.0, *bps, float(domain.R_inf)]
    elif len(bps) == K + 1:
        if bps[-1] != domain.R_inf:
            raise PathLossError("2", f"R_K = {bps[-1]} differs from R_inf = {domain.R_inf}")
    else:
        raise PathLossError("2", f"{K} slopes need {K - 1} interior breakpoints, got {len(bps)}")
    if not A0 > 0:
        raise PathLossError("4", f"A_0 = {A0} must be > 0")
    _validate(bps, exponents, domain.d)
    logs = [math.log(A0)]
    for k in range(K - 1):
        logs.append(logs[-1] + (exponents[k] - exponents[k + 1]) * math.log(bps[k + 1]))
    return PathLossModel(tuple(bps), exponents, tuple(logs), domain.d)


def eval_pathloss(model: PathLossModel, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("distance must be non-negative")
    if np.any(r_arr > model.R_inf * (1 + 1e-12)):
        raise ValueError(f"distance beyond R_inf = {model.R_inf}")
    out = np.exp(model.log_loss(r_arr))
    return float(out) if out.ndim == 0 else out


def is_bounded(model: PathLossModel) -> bool:
    return model.beta0 == 0


def is_physical(model: PathLossModel) -> bool:
    return model.beta0 == 0 and model.amplitudes[0] >= 1.0


def gain_volume_integral(model: PathLossModel, r_lo: float, r_hi: float) -> float:
    """Integral of 1/l(|x|) over the shell r_lo <= |x| <= r_hi in R^d.

    Multiplied by lambda * E(m) this is the mean interference from that shell.
    Returns inf when a singular near-field segment (beta_0 >= d) touches 0.
    """
    d = model.d
    c = ball_volume(d) * d
    total = 0.0
    for k in range(model.K):
        lo = max(r_lo, model.breakpoints[k])
        hi = min(r_hi, model.breakpoints[k + 1])
        if hi <= lo:
            continue
        b = model.exponents[k]
        A = math.exp(model.log_amplitudes[k])
        e = d - b
        if e == 0:
            if lo == 0:
                return math.inf
            total += c / A * math.log(hi / lo)
        elif e < 0 and lo == 0:
            return math.inf
        else:
            total += c / A * (hi**e - lo**e) / e
    return total
