"""Turn sampling and clustering of detected vehicles."""

from .sampler import (
    DEFAULT_MERGE_THRESHOLD,
    SATURATION_HEADWAY_PER_LANE,
    AssignedVehicle,
    DetectedVehicle,
    InflowSampler,
    SampleSet,
    cluster_vehicles,
    draw_sample_set,
    expected_inflow,
    phase_discharge_headways,
    sample_turns,
)

__all__ = [
    "DEFAULT_MERGE_THRESHOLD",
    "SATURATION_HEADWAY_PER_LANE",
    "AssignedVehicle",
    "DetectedVehicle",
    "InflowSampler",
    "SampleSet",
    "cluster_vehicles",
    "draw_sample_set",
    "expected_inflow",
    "phase_discharge_headways",
    "sample_turns",
]
