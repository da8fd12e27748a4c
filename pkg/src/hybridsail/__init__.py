"""Planar hybrid sail/propeller catamaran simulation toolkit.

Subpackages split along the pipeline: `dynamics` (3-DOF physics),
`controller` (tacking state machine), `calibration` (PWM-time fitting and
simulator tuning), `harness` (Monte Carlo experiments), `teleop` (live
session engine + wire protocol) and `cli`.
"""

from hybridsail.dynamics import (
    BoatConfig,
    BoatState,
    ActuatorCommand,
    ActuatorState,
    WindField,
    Simulator,
)

__version__ = "0.1.0"

__all__ = [
    "BoatConfig",
    "BoatState",
    "ActuatorCommand",
    "ActuatorState",
    "WindField",
    "Simulator",
    "__version__",
]
