"""Imitation-based user-cell association: mean-field game solver on the SBS
graph plus per-user linear Q-learning, with a compiled slot kernel and a
pure-Python fallback selected at import."""

from .config import ConfigError, SimConfig, parse_config
from .engine import HAVE_COMPILED_KERNEL, SlotMetrics, World, jain_index, kernel_name
from .learning import DivergenceError, LearnParams, QApproximator
from .mdp import AssociationState, LoadEstimateError, Observation
from .mfg import MeanFieldState, MfReward, solve_mfg
from .radio import LinkState, RadioParams
from .sim import (
    Cohort,
    LoadBalanceResult,
    TwoPhaseResult,
    run_load_balance_cases,
    run_two_phase,
)
from .topology import NetworkTopology, place_uniform

__version__ = "0.1.0"

__all__ = [
    "AssociationState",
    "Cohort",
    "ConfigError",
    "DivergenceError",
    "HAVE_COMPILED_KERNEL",
    "LearnParams",
    "LinkState",
    "LoadBalanceResult",
    "LoadEstimateError",
    "MeanFieldState",
    "MfReward",
    "NetworkTopology",
    "Observation",
    "QApproximator",
    "RadioParams",
    "SimConfig",
    "SlotMetrics",
    "TwoPhaseResult",
    "World",
    "jain_index",
    "kernel_name",
    "parse_config",
    "place_uniform",
    "run_load_balance_cases",
    "run_two_phase",
    "solve_mfg",
    "__version__",
]
