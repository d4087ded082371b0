import math
from dataclasses import dataclass

import numpy as np
import pytest

from udnscale import experiments
from udnscale.experiments import (
    PreconditionError,
    Regime,
    RegimeReport,
    SweepResult,
    _golden,
    check_grid,
    classify_from_curve,
    find_optimal_density,
    predict_regime,
    run_sweep,
)
from udnscale.fading import Composite, FadingDistribution, Pareto, RayleighPower, Truncated
from udnscale.geometry import NetworkDomain
from udnscale.sinr import CoverageCurve, SimConfig
from udnscale.tailclass import TailClass

from conftest import two_slope


@dataclass(frozen=True)
class SlowlyVaryingTail(FadingDistribution):
    """Stand-in for a law with tail index 0 (e.g. log-Pareto); only the class matters here."""

    @property
    def tail_class(self):
        return TailClass.regular(0.0)


@pytest.mark.parametrize(
    "beta0, f, regime",
    [
        (0.0, Composite(), Regime.INVERSE_U),
        (3.0, Composite(), Regime.SATURATION),
        (3.0, Pareto(0.5), Regime.SATURATION),
        (0.0, Pareto(0.5), Regime.SATURATION),
        (0.0, Pareto(4.0), Regime.INVERSE_U),
        (1.0, Composite(), Regime.INVERSE_U),
        (0.0, Truncated(RayleighPower(), 2.0), Regime.INVERSE_U),
        (3.0, SlowlyVaryingTail(), Regime.GROWTH),
        (0.0, SlowlyVaryingTail(), Regime.GROWTH),
        (0.0, Pareto(1.0), Regime.UNCLASSIFIED),
        (2.0, Composite(), Regime.UNCLASSIFIED),  # alpha_0 = d / beta_0 = 1
    ],
)
def test_predict_regime(domain, beta0, f, regime):
    assert predict_regime(two_slope(beta0, domain), f, domain) is regime


def test_grid_checks():
    check_grid(np.logspace(-2, 5, 12))
    check_grid(np.concatenate([[0.0], np.logspace(-2, 5, 12)]))
    with pytest.raises(ValueError):
        check_grid(np.logspace(-2, 5, 7))
    with pytest.raises(ValueError):
        check_grid(np.logspace(-2, 1, 12))
    with pytest.raises(ValueError):
        check_grid(np.linspace(1, 1e5, 12))


def _curve(p, se=0.005):
    lam = np.logspace(-2, 5, len(p))
    return lam, np.asarray(p, dtype=float), np.full(len(p), se)


def test_classify_synthetic_growth():
    assert classify_from_curve(*_curve(np.linspace(0.2, 0.995, 12))).regime is Regime.GROWTH


def test_classify_synthetic_saturation():
    p = [0.1, 0.3, 0.5, 0.6, 0.55, 0.5, 0.47, 0.45, 0.44, 0.44, 0.44, 0.44]
    obs = classify_from_curve(*_curve(p))
    assert obs.regime is Regime.SATURATION and obs.u_ratio < 0.05


def test_classify_synthetic_inverse_u():
    p = [0.1, 0.3, 0.5, 0.6, 0.62, 0.6, 0.55, 0.45, 0.3, 0.2, 0.1, 0.05]
    obs = classify_from_curve(*_curve(p))
    assert obs.regime is Regime.INVERSE_U and obs.peak_index == 4


def test_classify_ambiguous():
    # noisy steady decline: too steep for the ratio test, no separated interior peak
    p = np.linspace(0.55, 0.35, 12)
    obs = classify_from_curve(*_curve(p, se=0.05))
    assert obs.regime is Regime.UNCLASSIFIED and obs.u_ratio > 0.05


def test_golden_section_finds_peak():
    peak = 3e-5

    def objective(lam, seed):
        return -((math.log(lam) - math.log(peak)) ** 2)

    grid = np.logspace(-8, -1, 15)
    j = int(np.argmin(np.abs(np.log(grid) - math.log(peak))))
    best, (lo, hi) = _golden(objective, grid[j - 1], grid[j + 1], 0, "t", iters=12, probes=3)
    assert lo <= peak <= hi
    step = math.log(grid[1] / grid[0])
    assert abs(math.log(best / peak)) < step


def _fake_sweep(p):
    lam = np.logspace(-8, -1, len(p))
    cov = [CoverageCurve(np.array([1.0]), np.array([v]), np.array([0.01]), l, 10_000, 0) for v, l in zip(p, lam)]
    from udnscale.sinr import CapacityEstimate

    cap = [CapacityEstimate(v, 0.01, l, 10_000) for v, l in zip(p, lam)]
    return SweepResult(lam, np.array([1.0]), cov, cap, "x", 0)


def test_optimal_density_precondition(domain):
    cfg = SimConfig(domain, two_slope(0.0, domain), Composite(), W=1e-9, trials=10)
    with pytest.raises(PreconditionError):
        find_optimal_density(_fake_sweep([0.5] * 12), cfg)


def test_run_sweep_zero_point_and_failures(monkeypatch):
    dom = NetworkDomain(2, 1000.0)
    cfg = SimConfig(dom, two_slope(0.0, dom), Composite(), W=1e-9, trials=200, seed=2)
    grid = np.concatenate([[0.0], np.logspace(-8, -4, 8)])
    sweep = run_sweep(cfg, grid, [1.0])
    assert sweep.coverage[0].p_hat[0] == 0.0 and sweep.capacity[0].c_hat == 0.0
    assert not sweep.errors

    real = experiments.sample_sinr

    def flaky(cfg, lam, **kw):
        if lam == grid[3]:
            raise ArithmeticError("boom")
        return real(cfg, lam, **kw)

    monkeypatch.setattr(experiments, "sample_sinr", flaky)
    sweep = run_sweep(cfg, grid, [1.0])
    assert list(sweep.errors) == [3] and sweep.coverage[3] is None
    lam, p, se = sweep.coverage_at(1.0)
    assert lam.size == len(grid) - 1


def test_report_round_trip():
    rep = RegimeReport(Regime.INVERSE_U, Regime.INVERSE_U, 0.8, 1.0, 3.5, 0.81, "abc", "interior peak")
    assert RegimeReport.from_text(rep.to_text()) == rep
    bare = RegimeReport(Regime.SATURATION, Regime.UNCLASSIFIED, 0.1, 1.0)
    text = bare.to_text()
    assert "agree=false" in text and "lambda_p_per_km2=\n" in text
    assert RegimeReport.from_text(text) == bare
