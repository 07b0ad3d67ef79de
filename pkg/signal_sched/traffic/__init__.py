"""Traffic network, phase model and plan value types."""

from .model import (
    Cluster,
    ClusterMember,
    ClusterSchedule,
    DecisionAction,
    Extend,
    Fragment,
    FragmentKey,
    InflowSample,
    InitialConditions,
    IntersectionConfig,
    Interval,
    NetworkTopology,
    Phase,
    PhaseModel,
    Road,
    SignalTimingPlan,
    Terminate,
    TurnMovement,
    phase_for_turn,
)
from .validation import Violation, validate_network

__all__ = [
    "Cluster",
    "ClusterMember",
    "ClusterSchedule",
    "DecisionAction",
    "Extend",
    "Fragment",
    "FragmentKey",
    "InflowSample",
    "InitialConditions",
    "IntersectionConfig",
    "Interval",
    "NetworkTopology",
    "Phase",
    "PhaseModel",
    "Road",
    "SignalTimingPlan",
    "Terminate",
    "TurnMovement",
    "Violation",
    "phase_for_turn",
    "validate_network",
]
