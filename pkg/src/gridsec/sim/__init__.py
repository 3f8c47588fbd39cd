"""Deterministic grid simulator: topology, scenario config, engine, adversaries."""

from .config import ConfigError, Scenario, load_scenario, parse_scenario
from .engine import Engine, ScenarioResult, run_scenario
from .topology import Topology, TopologyError

__all__ = [
    "ConfigError",
    "Engine",
    "Scenario",
    "ScenarioResult",
    "Topology",
    "TopologyError",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
]
