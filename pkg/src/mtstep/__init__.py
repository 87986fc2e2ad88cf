"""Multi-time-step monolithic coupling of Newmark integrators.

Decompose a linear elastodynamics model into subdomains, give each its
own Newmark scheme and time-step, glue them with velocity constraints and
advance everything monolithically — one saddle-point solve per system
time-step, no staggering, with full energy and drift diagnostics.
"""

from .coupling import (
    CoupledSystem,
    SignedBooleanMatrix,
    Subdomain,
    SystemStepResult,
    advance_system_step,
    initialize_coupled_system,
)
from .diagnostics import (
    DriftRecord,
    EnergyBreakdown,
    drift_record,
    energy_algorithm,
    energy_interface,
    energy_norm,
    step_energy_report,
    subcycling_indicator,
    total_energy,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    NotConverged,
    SingularMatrix,
    SingularSaddleSystem,
)
from .newmark import (
    AVERAGE_ACCELERATION,
    CENTRAL_DIFFERENCE,
    KinematicState,
    NewmarkParams,
    critical_time_step,
    newmark_predict,
    newmark_step_unconstrained,
)
from .problems import SCENARIOS, Scenario

__version__ = "0.1.0"

__all__ = [
    "AVERAGE_ACCELERATION",
    "CENTRAL_DIFFERENCE",
    "ConfigError",
    "CoupledSystem",
    "DimensionMismatch",
    "DriftRecord",
    "EnergyBreakdown",
    "KinematicState",
    "NewmarkParams",
    "NotConverged",
    "SCENARIOS",
    "Scenario",
    "SignedBooleanMatrix",
    "SingularMatrix",
    "SingularSaddleSystem",
    "Subdomain",
    "SystemStepResult",
    "advance_system_step",
    "critical_time_step",
    "drift_record",
    "energy_algorithm",
    "energy_interface",
    "energy_norm",
    "initialize_coupled_system",
    "newmark_predict",
    "newmark_step_unconstrained",
    "step_energy_report",
    "subcycling_indicator",
    "total_energy",
]
