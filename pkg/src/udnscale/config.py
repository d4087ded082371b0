"""Experiment configuration files (YAML) with field- and line-precise errors.

Densities in config files and CSV outputs are per km^d; the engine works per m^d.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np
import yaml

from .channel import PathLossError, PathLossModel, build_pathloss
from .fading import FadingDistribution, fading_from_dict
from .geometry import NetworkDomain
from .sinr import SimConfig

PRESETS = ("fig1a", "fig1b", "fig2a", "fig2b", "fig5")

_CONDITION_FIELD = {"1": "exponents", "2": "breakpoints", "3a": "exponents", "3b": "exponents", "3c": "exponents"}
_CONDITION_TEXT = {
    "1": "at least one slope",
    "2": "0 < R_1 < ... < R_inf",
    "3a": "beta_0 >= 0",
    "3b": "beta_k >= d - 1 for k >= 1",
    "3c": "strictly increasing exponents",
    "4": "continuous path loss with A_0 > 0",
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None, source: str | None = None):
        where = f"{source or '<config>'}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {path}: {message}")
        self.path = path
        self.line = line


def km_to_m_density(lam_per_km: float, d: int) -> float:
    return lam_per_km / 1000.0**d


def m_to_km_density(lam_per_m: float, d: int) -> float:
    return lam_per_m * 1000.0**d


@dataclass(frozen=True)
class SimulationSettings:
    trials: int = 10_000
    seed: int = 1
    r_sim: object = "auto"
    bias_tol: float = 1e-3
    node_budget: int = 20_000


@dataclass(frozen=True)
class SweepSettings:
    lambda_min: float = 1e-2  # per km^d
    lambda_max: float = 1e5
    points: int = 12
    y_refs: tuple = (0.1, 1.0, 10.0)
    y_ref: float = 1.0
    eps: float = 0.02
    delta: float = 0.05
    u: float = 10.0
    z: float = 3.0

    def grid(self) -> np.ndarray:
        return np.logspace(math.log10(self.lambda_min), math.log10(self.lambda_max), self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    domain: NetworkDomain
    A0: float
    breakpoints: tuple  # interior R_1..R_{K-1}, meters
    exponents: tuple
    fading: FadingDistribution
    W: float
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    name: str = ""
    expected_regime: str | None = None

    @property
    def model(self) -> PathLossModel:
        return build_pathloss(self.A0, self.exponents, self.breakpoints, self.domain)

    def sim_config(self, seed: int | None = None, trials: int | None = None) -> SimConfig:
        s = self.simulation
        return SimConfig(
            self.domain,
            self.model,
            self.fading,
            W=self.W,
            trials=s.trials if trials is None else trials,
            seed=s.seed if seed is None else seed,
            r_sim=s.r_sim,
            bias_tol=s.bias_tol,
            node_budget=s.node_budget,
        )

    def lambda_grid(self) -> np.ndarray:
        """Sweep grid per m^d."""
        return km_to_m_density(self.sweep.grid(), self.domain.d)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "domain": {"d": self.domain.d, "R_inf": self.domain.R_inf, "unit": "m"},
            "pathloss": {
                "K": len(self.exponents),
                "A0": self.A0,
                "breakpoints": list(self.breakpoints),
                "exponents": list(self.exponents),
            },
            "fading": self.fading.params(),
            "noise": {"W": self.W},
            "simulation": asdict(self.simulation),
            "sweep": {**asdict(self.sweep), "y_refs": list(self.sweep.y_refs)},
        }
        if self.expected_regime is not None:
            out["expected_regime"] = self.expected_regime
        return out

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


def _line_index(text: str) -> dict:
    """Map key paths to 1-based source lines."""
    lines = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (k.value,)
                lines[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    root = yaml.compose(text)
    if root is not None:
        walk(root, ())
    return lines


class _Reader:
    def __init__(self, data: dict, lines: dict, source: str | None):
        self.data = data
        self.lines = lines
        self.source = source

    def fail(self, path: tuple, msg: str):
        # report the deepest known line on the path
        line = None
        for n in range(len(path), -1, -1):
            if path[:n] in self.lines:
                line = self.lines[path[:n]]
                break
        raise ConfigError(".".join(str(p) for p in path) or "<root>", msg, line, self.source)

    def block(self, name: str, required=True) -> dict:
        val = self.data.get(name)
        if val is None:
            if required:
                self.fail((name,), "missing block")
            return {}
        if not isinstance(val, dict):
            self.fail((name,), "must be a mapping")
        return val

    def get(self, path: tuple, kind, default=None, required=False):
        node = self.data
        for p in path:
            if not isinstance(node, dict) or p not in node:
                if required:
                    self.fail(path, "missing required field")
                return default
            node = node[p]
        try:
            if kind is float:
                if isinstance(node, bool):
                    raise TypeError
                return float(node)
            if kind is int:
                if isinstance(node, bool) or (isinstance(node, float) and not node.is_integer()):
                    raise TypeError
                return int(node)
            if kind is list:
                if not isinstance(node, list):
                    raise TypeError
                return [float(v) for v in node]
            return kind(node)
        except (TypeError, ValueError):
            self.fail(path, f"expected {kind.__name__}, got {node!r}")


def parse_config(text: str, source: str | None = None) -> ExperimentConfig:
    try:
        lines = _line_index(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("<syntax>", str(getattr(exc, "problem", exc)), mark.line + 1 if mark else None, source)
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping", 1, source)
    rd = _Reader(data, lines, source)
    known = {"name", "domain", "pathloss", "fading", "noise", "simulation", "sweep", "expected_regime"}
    for key in data:
        if key not in known:
            rd.fail((key,), f"unknown block; expected one of {sorted(known)}")

    dom_b = rd.block("domain")
    d = rd.get(("domain", "d"), int, 2)
    unit = dom_b.get("unit", "m")
    if unit not in ("m", "km"):
        rd.fail(("domain", "unit"), f"unit must be 'm' or 'km', got {unit!r}")
    scale = 1000.0 if unit == "km" else 1.0
    R_inf = rd.get(("domain", "R_inf"), float, required=True) * scale
    try:
        domain = NetworkDomain(d, R_inf)
    except ValueError as exc:
        rd.fail(("domain",), str(exc))

    rd.block("pathloss")
    A0 = rd.get(("pathloss", "A0"), float, 1.0)
    exps = rd.get(("pathloss", "exponents"), list, required=True)
    bps = [b * scale for b in rd.get(("pathloss", "breakpoints"), list, [])]
    K = rd.get(("pathloss", "K"), int, len(exps))
    if K != len(exps):
        rd.fail(("pathloss", "K"), f"K = {K} but {len(exps)} exponents given")
    if len(bps) != K - 1:
        rd.fail(("pathloss", "breakpoints"), f"K = {K} slopes need {K - 1} interior breakpoints, got {len(bps)}")
    try:
        build_pathloss(A0, exps, bps, domain)
    except PathLossError as exc:
        fld = _CONDITION_FIELD.get(exc.condition, "A0")
        rd.fail(("pathloss", fld), f"{exc} violates {_CONDITION_TEXT.get(exc.condition, exc.condition)}")

    fad = rd.block("fading")
    try:
        fading = fading_from_dict(fad)
    except (TypeError, ValueError) as exc:
        rd.fail(("fading",), str(exc))

    W = rd.get(("noise", "W"), float, 0.0)
    if not W >= 0:
        rd.fail(("noise", "W"), f"noise power must be >= 0, got {W}")

    sim_b = rd.block("simulation", required=False)
    r_sim = sim_b.get("r_sim", "auto")
    if r_sim in ("none", "None"):
        r_sim = None
    if not (r_sim in ("auto", None) or (isinstance(r_sim, (int, float)) and not isinstance(r_sim, bool) and r_sim > 0)):
        rd.fail(("simulation", "r_sim"), f"expected 'auto', 'none' or a positive radius, got {r_sim!r}")
    if isinstance(r_sim, (int, float)):
        r_sim = float(r_sim) * scale
    sim = SimulationSettings(
        trials=rd.get(("simulation", "trials"), int, SimulationSettings.trials),
        seed=rd.get(("simulation", "seed"), int, SimulationSettings.seed),
        r_sim=r_sim,
        bias_tol=rd.get(("simulation", "bias_tol"), float, SimulationSettings.bias_tol),
        node_budget=rd.get(("simulation", "node_budget"), int, SimulationSettings.node_budget),
    )
    if sim.trials < 1:
        rd.fail(("simulation", "trials"), "trials must be >= 1")
    if not 0 <= sim.seed < 2**64:
        rd.fail(("simulation", "seed"), "seed must be a 64-bit unsigned integer")
    if not sim.bias_tol > 0:
        rd.fail(("simulation", "bias_tol"), "must be > 0")
    if sim.node_budget < 1:
        rd.fail(("simulation", "node_budget"), "must be >= 1")

    rd.block("sweep", required=False)
    d_sw = SweepSettings()
    sw = SweepSettings(
        lambda_min=rd.get(("sweep", "lambda_min"), float, d_sw.lambda_min),
        lambda_max=rd.get(("sweep", "lambda_max"), float, d_sw.lambda_max),
        points=rd.get(("sweep", "points"), int, d_sw.points),
        y_refs=tuple(rd.get(("sweep", "y_refs"), list, list(d_sw.y_refs))),
        y_ref=rd.get(("sweep", "y_ref"), float, d_sw.y_ref),
        eps=rd.get(("sweep", "eps"), float, d_sw.eps),
        delta=rd.get(("sweep", "delta"), float, d_sw.delta),
        u=rd.get(("sweep", "u"), float, d_sw.u),
        z=rd.get(("sweep", "z"), float, d_sw.z),
    )
    if not 0 < sw.lambda_min < sw.lambda_max:
        rd.fail(("sweep", "lambda_min"), "need 0 < lambda_min < lambda_max")
    if sw.points < 8:
        rd.fail(("sweep", "points"), "need >= 8 grid points")
    if math.log10(sw.lambda_max / sw.lambda_min) < 4:
        rd.fail(("sweep", "lambda_max"), "grid must span >= 4 decades")
    if not sw.y_refs or any(y <= 0 for y in sw.y_refs) or list(sw.y_refs) != sorted(sw.y_refs):
        rd.fail(("sweep", "y_refs"), "thresholds must be positive and ascending")
    if sw.u <= 1:
        rd.fail(("sweep", "u"), "ratio test factor must be > 1")

    expected = data.get("expected_regime")
    if expected is not None and expected not in ("Growth", "Saturation", "InverseU"):
        rd.fail(("expected_regime",), f"unknown regime {expected!r}")
    return ExperimentConfig(
        domain, A0, tuple(bps), tuple(exps), fading, W, sim, sw, str(data.get("name", "")), expected
    )


def load_config(path) -> ExperimentConfig:
    """Read a config file, or a bundled preset when ``path`` is a preset name."""
    path = str(path)
    if path in PRESETS:
        return load_preset(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, path)


def load_preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError("<preset>", f"unknown preset {name!r}; expected one of {list(PRESETS)}")
    text = resources.files("udnscale.presets").joinpath(f"{name}.yaml").read_text(encoding="utf-8")
    return parse_config(text, f"preset:{name}")
