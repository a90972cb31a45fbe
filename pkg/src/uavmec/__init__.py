"""Discrete-time simulator and per-slot optimizer for a single-UAV edge
computing system: queue-weighted task offloading as a potential game with
closed-form resource shares, and successive convex approximation for the
next UAV position, plus benchmark schemes and experiment tooling."""

__version__ = "0.1.0"

from .lyapunov import EnergyQueues, drift_bound_constant, lyapunov_value, update_queues
from .scenario import SCHEME_NAMES, ConfigError, ScenarioConfig, load_config, load_config_text
from .sim import Metrics, Scenario, SlotRecord, generate_scenario, run_episode

__all__ = [
    "__version__",
    "EnergyQueues",
    "drift_bound_constant",
    "lyapunov_value",
    "update_queues",
    "SCHEME_NAMES",
    "ConfigError",
    "ScenarioConfig",
    "load_config",
    "load_config_text",
    "Metrics",
    "Scenario",
    "SlotRecord",
    "generate_scenario",
    "run_episode",
]
