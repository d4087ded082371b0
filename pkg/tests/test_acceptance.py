"""Acceptance criteria 1-9. Each test prints one ``criterion N: PASS|FAIL`` line.

Runtime on one core is roughly 12 minutes, dominated by the five preset sweeps.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from udnscale.channel import build_pathloss
from udnscale.config import PRESETS, load_preset
from udnscale.experiments import classify_observed, predict_regime, run_sweep
from udnscale.fading import Composite, Pareto
from udnscale.geometry import NetworkDomain
from udnscale.io import write_capacity_csv, write_coverage_csv
from udnscale.sinr import SimConfig, coverage_from_samples, coverage_integral, sample_sinr
from udnscale.streams import substream
from udnscale.tails import analytic_tail_p, asymptotic_tail_p, hill_estimator, ks_distance, sample_received_power

pytestmark = pytest.mark.acceptance

# Near-field dominated domain for tail-index and asymptotic checks: with
# R_inf = 12 m about 70% of nodes sit inside the 10 m breakpoint.
SMALL = NetworkDomain(2, 12.0)
N_POWER = 10**6


@pytest.fixture(scope="module")
def sweeps():
    out = {}
    t0 = time.perf_counter()
    for name in PRESETS:
        cfg = load_preset(name)
        sim = cfg.sim_config()
        out[name] = (cfg, sim, run_sweep(sim, cfg.lambda_grid(), cfg.sweep.y_refs, keep_samples=True))
    out["_seconds"] = time.perf_counter() - t0
    return out


@pytest.mark.parametrize("name", PRESETS)
def test_c1_analytic_tail_vs_sampling(name, verdict):
    cfg = load_preset(name)
    model, f, dom = cfg.model, cfg.fading, cfg.domain
    t0 = time.perf_counter()
    x = sample_received_power(N_POWER, model, f, dom, substream(cfg.simulation.seed, "accept-ks"))
    ks = ks_distance(x, lambda t: 1.0 - analytic_tail_p(t, model, f, dom), n_grid=4000)
    secs = time.perf_counter() - t0
    ok = ks <= 0.005 and secs <= 120
    verdict(1, ok, f"[{name}] KS={ks:.5f} (<= 0.005) in {secs:.0f}s (<= 120s)")
    assert ok


HILL_CASES = [
    (3.0, Composite(8.0), 2.0 / 3.0),
    (1.0, Composite(8.0), 2.0),
    (0.0, Pareto(0.5), 0.5),
    (0.0, Pareto(4.0), 4.0),
]


def test_c2_hill_index_recovery(verdict):
    # pre-declared k = sqrt(n) upper order statistics, the usual rule of thumb
    k_frac = math.sqrt(N_POWER) / N_POWER
    t0 = time.perf_counter()
    parts, ok = [], True
    for i, (beta0, f, target) in enumerate(HILL_CASES):
        model = build_pathloss(1.0, [beta0, 4.0], [10.0], SMALL)
        x = sample_received_power(N_POWER, model, f, SMALL, substream(2024, "accept-hill", i))
        h = hill_estimator(x, k_frac)
        good = abs(h.alpha / target - 1) <= 0.15
        ok &= good
        parts.append(f"beta0={beta0:g},{f.kind}: {h.alpha:.3f} vs {target:.3f} ({'ok' if good else 'off'})")
    secs = time.perf_counter() - t0
    ok &= secs <= 300
    verdict(2, ok, "; ".join(parts) + f"; {secs:.0f}s")
    assert ok


ASYMPTOTIC_CASES = [
    (0.0, 4.0), (0.0, 1.5),  # flat near field
    (1.0, 1.2), (1.0, 1.5),  # alpha_0 >= alpha
    (3.0, 4.0), (3.0, 1.5), (1.0, 4.0),  # alpha_0 < alpha
]


def test_c3_asymptotic_ratio(verdict):
    ts = np.logspace(-4, 12, 65)
    worst, parts = 0.0, []
    for beta0, alpha in ASYMPTOTIC_CASES:
        model = build_pathloss(1.0, [beta0, 4.0], [10.0], SMALL)
        f = Pareto(alpha)
        an = analytic_tail_p(ts, model, f, SMALL)
        sel = an < 1e-4
        dev = float(np.max(np.abs(an[sel] / asymptotic_tail_p(ts[sel], model, f, SMALL) - 1)))
        worst = max(worst, dev)
        parts.append(f"({beta0:g},{alpha:g}):{dev:.4f}")
    ok = worst <= 0.05
    verdict(3, ok, f"max |ratio-1| = {worst:.4f} (<= 0.05) " + " ".join(parts))
    assert ok


def test_c4_regime_matrix(sweeps, verdict):
    parts, ok = [], True
    for name in PRESETS:
        cfg, sim, sweep = sweeps[name]
        pred = predict_regime(cfg.model, cfg.fading, cfg.domain)
        obs = classify_observed(sweep, cfg.sweep.y_ref, cfg.sweep.eps, cfg.sweep.delta, cfg.sweep.u, cfg.sweep.z)
        good = pred is obs.regime and pred.value == cfg.expected_regime and len(sweep.lambdas) == 12
        ok &= good
        parts.append(f"{name}: {pred.value}/{obs.regime.value}")
    secs = sweeps["_seconds"]
    ok &= secs <= 1800
    verdict(4, ok, "; ".join(parts) + f"; sweeps {secs:.0f}s (<= 1800s)")
    assert ok


def test_c5_saturation_stability(sweeps, verdict):
    parts, ok = [], True
    for name in ("fig1a", "fig1b"):
        _, _, sweep = sweeps[name]
        ks = stats.ks_2samp(sweep.samples[-1], sweep.samples[-2]).statistic
        ok &= ks < 0.02
        parts.append(f"{name}: KS={ks:.4f}")
    verdict(5, ok, "; ".join(parts) + " (< 0.02)")
    assert ok


def test_c6_decay_to_zero(sweeps, verdict):
    parts, ok = [], True
    for name in ("fig2b", "fig5"):
        cfg, _, sweep = sweeps[name]
        j = int(np.argmin(np.abs(np.log(sweep.y_refs) - math.log(cfg.sweep.y_ref))))
        p = np.array([c.p_hat[j] for c in sweep.coverage])
        ci = np.array([c.ci_halfwidth[j] for c in sweep.coverage])
        k = int(np.argmax(p))
        good = p[-1] < 0.5 * p[k] and p[-1] + ci[-1] < p[k] - ci[k]
        ok &= good
        parts.append(f"{name}: top {p[-1]:.4f}+-{ci[-1]:.4f} vs peak {p[k]:.4f}+-{ci[k]:.4f}")
    verdict(6, ok, "; ".join(parts))
    assert ok


def test_c7_sparse_monotonicity(verdict):
    dom = NetworkDomain(2, 40_000.0)
    model = build_pathloss(1.0, [0.0, 4.0], [10.0], dom)
    # 90 dB mean gain puts single-node powers at the noise level for these densities
    cfg = SimConfig(dom, model, Composite(8.0, 90.0), W=1.0, trials=100_000, seed=77)
    y = np.logspace(-3, 0, 10)
    lam1, lam2 = 0.01e-6, 0.03e-6
    c1 = coverage_from_samples(sample_sinr(cfg, lam1, lam_index=0).Y, y, lam1)
    c2 = coverage_from_samples(sample_sinr(cfg, lam2, lam_index=1).Y, y, lam2)
    gap = (c2.p_hat - c2.ci_halfwidth) - (c1.p_hat + c1.ci_halfwidth)
    ok = bool(np.all(gap > 0))
    verdict(7, ok, f"min CI gap {gap.min():.4f} over 10 thresholds (> 0)")
    assert ok


def test_c8_capacity_coverage_identity(sweeps, verdict):
    y_grid = np.logspace(-6, 10, 641)
    worst, n = 0.0, 0
    for name in PRESETS:
        _, _, sweep = sweeps[name]
        for cap, Y in zip(sweep.capacity, sweep.samples):
            val, se_int = coverage_integral(Y, y_grid)
            se = math.hypot(cap.std_err, se_int)
            diff = abs(cap.c_hat - val)
            z = diff / se if se > 0 else (0.0 if diff == 0 else math.inf)
            worst = max(worst, z)
            n += 1
    ok = worst <= 3.0
    verdict(8, ok, f"max |c_hat - integral| = {worst:.3f} combined SE over {n} (config, density) points (<= 3)")
    assert ok


def test_c9_determinism_across_workers(tmp_path, verdict):
    cfg = load_preset("fig5")
    sim = cfg.sim_config(trials=2000)
    grid = np.logspace(-8, -3, 8)
    blobs = []
    for w in (1, 8):
        sweep = run_sweep(sim, grid, cfg.sweep.y_refs, workers=w)
        write_coverage_csv(sweep.coverage, tmp_path / f"cov{w}.csv")
        write_capacity_csv(sweep.capacity, tmp_path / f"cap{w}.csv")
        blobs.append((tmp_path / f"cov{w}.csv").read_bytes() + (tmp_path / f"cap{w}.csv").read_bytes())
    ok = blobs[0] == blobs[1]
    verdict(9, ok, f"workers 1 vs 8: {'identical' if ok else 'different'} CSV bytes ({len(blobs[0])} bytes)")
    assert ok
