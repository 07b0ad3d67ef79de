"""Mesoscopic network simulator and schedule-driven controllers."""

from .controller import (
    ControllerKind,
    ControllerParams,
    IntersectionController,
    PlanningStats,
    controller_label,
)
from .episode import DEFAULT_STALL_LIMIT, run_episode
from .metrics import (
    RunMetrics,
    VehicleRecord,
    atomic_write_text,
    read_trace_csv,
    vehicle_csv,
    write_planning_csv,
    write_trace_csv,
    write_vehicle_csv,
)
from .routes import DemandProfile, SimConfig, SimVehicle, VehicleState, generate_routes
from .signals import SignalHead, SignalState, TraceRow, check_signal_trace
from .world import World

__all__ = [
    "DEFAULT_STALL_LIMIT",
    "ControllerKind",
    "ControllerParams",
    "DemandProfile",
    "IntersectionController",
    "PlanningStats",
    "RunMetrics",
    "SignalHead",
    "SignalState",
    "SimConfig",
    "SimVehicle",
    "TraceRow",
    "VehicleRecord",
    "VehicleState",
    "World",
    "atomic_write_text",
    "check_signal_trace",
    "controller_label",
    "generate_routes",
    "read_trace_csv",
    "run_episode",
    "vehicle_csv",
    "write_planning_csv",
    "write_trace_csv",
    "write_vehicle_csv",
]
