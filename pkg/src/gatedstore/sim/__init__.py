"""Deterministic simulation harness: network, adversaries, scenarios,
properties, metrics and reporting."""

from .adversary import AdversarySpec
from .network import PrfCoin, SimNetwork, derive_rng
from .scenario import RunResult, SimConfig, System, build_system, run_scenario

__all__ = [
    "AdversarySpec",
    "SimNetwork",
    "PrfCoin",
    "derive_rng",
    "SimConfig",
    "System",
    "RunResult",
    "build_system",
    "run_scenario",
]
