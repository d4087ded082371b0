"""Densification scaling of coverage and capacity in random wireless networks.

Multi-slope path loss over a Poisson field of nodes, tail analysis of the
single-node received power, a Monte Carlo SINR engine and regime experiments.
"""

from .channel import PathLossError, PathLossModel, build_pathloss, eval_pathloss
from .config import ConfigError, ExperimentConfig, load_config, load_preset
from .experiments import Regime, classify_observed, predict_regime, run_sweep
from .fading import Composite, Constant, Gamma, Lognormal, Pareto, RayleighPower, Truncated
from .geometry import DensityConfig, NetworkDomain
from .sinr import SimConfig, estimate_capacity, estimate_coverage, simulate_realization
from .tailclass import TailClass
from .tails import analytic_tail_p, asymptotic_tail_p, classify_received_power, hill_estimator

__version__ = "0.1.0"
