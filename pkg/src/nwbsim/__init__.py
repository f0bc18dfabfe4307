"""Discrete-event simulator for network-wide broadcast protocols in MANETs."""

from nwbsim.config import (
    LossModelConfig,
    MobilityConfig,
    Scenario,
    SrConfig,
)
from nwbsim.simulation import ScenarioRun, run_scenario

__version__ = "0.1.0"

__all__ = [
    "LossModelConfig",
    "MobilityConfig",
    "Scenario",
    "SrConfig",
    "ScenarioRun",
    "run_scenario",
]
