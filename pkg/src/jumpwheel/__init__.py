"""Hybrid rolling/jumping simulator for a pendulum-driven wheel robot."""

from .analysis import DiagnosticsReport, JumpMetrics, diagnostics, jump_metrics
from .control import (
    ControllerConfig,
    ReferenceProfile,
    Segment,
    builtin_profiles,
    control_torque,
    eval_reference,
)
from .errors import (
    DegenerateSegmentError,
    JumpwheelError,
    ModelDegeneracyError,
    NumericalDivergenceError,
    ParameterError,
    RunawayChatterError,
)
from .model import (
    Accelerations,
    ConstraintForces,
    Phase,
    RobotParams,
    SimState,
    com_kinematics,
    constraint_forces,
    flight_dynamics,
    motor_current,
    rolling_dynamics,
    total_energy,
)
from .sim import COLUMNS, Event, EventKind, HybridSimulator, SimConfig, TrajectoryRecord, run_scenario, step

__version__ = "0.1.0"
