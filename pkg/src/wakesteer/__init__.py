"""Closed-loop wind-farm wake steering at desk scale.

A steady-state Gaussian wake surrogate with offline calibration, online
ambient-condition estimation, deterministic/robust yaw optimization, and a
lock-step TCP co-simulation harness pairing the controller with a synthetic
plant.
"""

from .farm import (
    AmbientConditions,
    ControlVector,
    FarmEvaluation,
    FarmLayout,
    FarmScenario,
    evaluate_farm,
    sample_flow,
)
from .turbine import TurbineSpec, nrel5mw, turbine_power
from .wake import OperatingPoint, WakeParams

__version__ = "0.1.0"

__all__ = [
    "AmbientConditions",
    "ControlVector",
    "FarmEvaluation",
    "FarmLayout",
    "FarmScenario",
    "OperatingPoint",
    "TurbineSpec",
    "WakeParams",
    "evaluate_farm",
    "nrel5mw",
    "sample_flow",
    "turbine_power",
    "__version__",
]
