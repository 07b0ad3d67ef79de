"""Turn sampling and proximity clustering of detected vehicles into inflows."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..exceptions import MissingTurnRowError
from ..traffic.model import (
    Cluster,
    ClusterMember,
    InflowSample,
    IntersectionConfig,
    NetworkTopology,
    PhaseModel,
    RoadId,
    TurnMovement,
)

DEFAULT_MERGE_THRESHOLD = 3.0  # seconds
SATURATION_HEADWAY_PER_LANE = 2.5  # seconds per vehicle on a single lane
GRID_EPSILON = 1e-9

SeedLike = int | Sequence[int]
Headways = float | Sequence[float]


@dataclass(frozen=True)
class DetectedVehicle:
    """A vehicle observed (or announced) upstream of the stop line."""

    vehicle_id: str
    entry_road: RoadId
    eta: float  # estimated stop-line arrival, seconds
    weight: float = 1.0


@dataclass(frozen=True)
class AssignedVehicle:
    """A detected vehicle with an exit road chosen for one realization."""

    vehicle_id: str
    entry_road: RoadId
    exit_road: RoadId
    eta: float
    weight: float = 1.0


@dataclass(frozen=True)
class SampleSet:
    """Sampled inflow realizations for one intersection and decision step."""

    samples: tuple[InflowSample, ...]
    seed: SeedLike | None = None

    def __len__(self) -> int:
        return len(self.samples)

    @classmethod
    def single(cls, sample: InflowSample) -> SampleSet:
        return cls(samples=(sample,), seed=None)


def _turn_table(cfg: IntersectionConfig, entry: RoadId) -> tuple[list[RoadId], np.ndarray]:
    row = cfg.turn_row(entry)
    if not row:
        raise MissingTurnRowError(
            f"Entry road {entry} has no turn probabilities at intersection {cfg.id}"
        )
    exits = [exit_road for exit_road, _ in row]
    cumulative = np.cumsum([p for _, p in row])
    return exits, cumulative


def sample_turns(
    vehicles: Sequence[DetectedVehicle],
    cfg: IntersectionConfig,
    rng: np.random.Generator,
) -> dict[str, RoadId]:
    """Draw one exit road per vehicle from its entry road's turn probabilities."""
    tables: dict[RoadId, tuple[list[RoadId], np.ndarray]] = {}
    for vehicle in vehicles:
        if vehicle.entry_road not in tables:
            tables[vehicle.entry_road] = _turn_table(cfg, vehicle.entry_road)

    draws = rng.random(len(vehicles))
    assignment: dict[str, RoadId] = {}
    for vehicle, u in zip(vehicles, draws, strict=True):
        exits, cumulative = tables[vehicle.entry_road]
        index = int(np.searchsorted(cumulative, u, side="right"))
        assignment[vehicle.vehicle_id] = exits[min(index, len(exits) - 1)]
    return assignment


def _phase_headway(discharge_headway: Headways, phase: int) -> float:
    if isinstance(discharge_headway, int | float):
        return float(discharge_headway)
    return float(discharge_headway[phase])


def _snap_up(value: float, resolution: float) -> float:
    return math.ceil(value / resolution - GRID_EPSILON) * resolution


def cluster_vehicles(
    assigned: Sequence[AssignedVehicle],
    pm: PhaseModel,
    discharge_headway: Headways = SATURATION_HEADWAY_PER_LANE,
    merge_threshold: float = DEFAULT_MERGE_THRESHOLD,
    resolution: float | None = None,
) -> InflowSample:
    """Group vehicles per phase into clusters by ETA proximity.

    Consecutive vehicles of a phase whose ETA gap is at most ``merge_threshold``
    share a cluster. A cluster lasts ``max(eta span, count * headway)``. With a
    ``resolution`` the arrival is rounded up and the length rounded up onto that
    grid, which is what the scheduler searches over.
    """
    if merge_threshold <= 0:
        raise ValueError("merge_threshold must be positive")

    members: list[list[AssignedVehicle]] = [[] for _ in range(len(pm))]
    for vehicle in assigned:
        phase = pm.phase_for_turn(TurnMovement(vehicle.entry_road, vehicle.exit_road))
        members[phase].append(vehicle)

    per_phase: list[tuple[Cluster, ...]] = []
    for phase, vehicles in enumerate(members):
        headway = _phase_headway(discharge_headway, phase)
        if headway <= 0:
            raise ValueError("discharge_headway must be positive")
        ordered = sorted(vehicles, key=lambda v: (v.eta, v.vehicle_id))
        groups: list[list[AssignedVehicle]] = []
        for vehicle in ordered:
            if groups and vehicle.eta - groups[-1][-1].eta <= merge_threshold:
                groups[-1].append(vehicle)
            else:
                groups.append([vehicle])
        per_phase.append(tuple(_make_cluster(g, headway, resolution) for g in groups))

    return InflowSample(per_phase=tuple(per_phase))


def _make_cluster(
    group: list[AssignedVehicle], headway: float, resolution: float | None
) -> Cluster:
    count = math.fsum(v.weight for v in group)
    arrival = group[0].eta
    length = max(group[-1].eta - arrival, count * headway)
    if resolution is not None:
        arrival = _snap_up(arrival, resolution)
        length = max(resolution, _snap_up(length, resolution))
    composition = tuple(
        ClusterMember(v.vehicle_id, v.eta, v.exit_road, v.weight) for v in group
    )
    return Cluster(count=count, arrival=arrival, length=length, composition=composition)


def draw_sample_set(
    vehicles: Sequence[DetectedVehicle],
    cfg: IntersectionConfig,
    count: int,
    seed: SeedLike,
    *,
    discharge_headway: Headways = SATURATION_HEADWAY_PER_LANE,
    merge_threshold: float = DEFAULT_MERGE_THRESHOLD,
    resolution: float | None = None,
    per_sample_vehicles: Sequence[Sequence[DetectedVehicle]] | None = None,
) -> SampleSet:
    """Repeat turn sampling and clustering ``count`` times on seeded substreams.

    Substream ``j`` of ``SeedSequence(seed)`` drives sample ``j``. When
    ``per_sample_vehicles`` is given (observations extended with non-local
    arrivals), sample ``j`` is drawn from ``per_sample_vehicles[j]``.
    """
    if count < 1:
        raise ValueError("Sample count must be at least 1")
    if per_sample_vehicles is not None and len(per_sample_vehicles) != count:
        raise ValueError(
            f"Expected {count} per-sample vehicle lists, got {len(per_sample_vehicles)}"
        )

    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
    samples: list[InflowSample] = []
    for index, rng in enumerate(streams):
        observed = vehicles if per_sample_vehicles is None else per_sample_vehicles[index]
        exits = sample_turns(observed, cfg, rng)
        assigned = [
            AssignedVehicle(v.vehicle_id, v.entry_road, exits[v.vehicle_id], v.eta, v.weight)
            for v in observed
        ]
        samples.append(
            cluster_vehicles(assigned, cfg.phase_model, discharge_headway, merge_threshold, resolution)
        )
    return SampleSet(samples=tuple(samples), seed=seed)


def expected_inflow(
    vehicles: Sequence[DetectedVehicle],
    cfg: IntersectionConfig,
    pm: PhaseModel,
    discharge_headway: Headways = SATURATION_HEADWAY_PER_LANE,
    merge_threshold: float = DEFAULT_MERGE_THRESHOLD,
    resolution: float | None = None,
) -> InflowSample:
    """Split every vehicle into fractional copies, one per possible turn."""
    copies: list[AssignedVehicle] = []
    for vehicle in vehicles:
        row = cfg.turn_row(vehicle.entry_road)
        if not row:
            raise MissingTurnRowError(
                f"Entry road {vehicle.entry_road} has no turn probabilities at intersection {cfg.id}"
            )
        copies.extend(
            AssignedVehicle(
                vehicle.vehicle_id,
                vehicle.entry_road,
                exit_road,
                vehicle.eta,
                vehicle.weight * probability,
            )
            for exit_road, probability in row
            if probability > 0
        )
    return cluster_vehicles(copies, pm, discharge_headway, merge_threshold, resolution)


def phase_discharge_headways(
    cfg: IntersectionConfig,
    topology: NetworkTopology,
    headway_per_lane: float = SATURATION_HEADWAY_PER_LANE,
) -> tuple[float, ...]:
    """Discharge headway per phase from the lanes of the entry roads it serves."""
    headways: list[float] = []
    for phase in cfg.phase_model:
        entries = {turn.entry for turn in phase.turns}
        lanes = sum(topology.road(road_id).lanes for road_id in entries)
        headways.append(headway_per_lane / max(1, lanes))
    return tuple(headways)


class InflowSampler:
    """Per-intersection sampler bound to its clustering parameters."""

    def __init__(
        self,
        cfg: IntersectionConfig,
        discharge_headway: Headways = SATURATION_HEADWAY_PER_LANE,
        merge_threshold: float = DEFAULT_MERGE_THRESHOLD,
        resolution: float | None = 1.0,
    ):
        self.cfg = cfg
        self.discharge_headway = discharge_headway
        self.merge_threshold = merge_threshold
        self.resolution = resolution

    def draw(
        self,
        vehicles: Sequence[DetectedVehicle],
        count: int,
        seed: SeedLike,
        per_sample_vehicles: Sequence[Sequence[DetectedVehicle]] | None = None,
    ) -> SampleSet:
        sample_set = draw_sample_set(
            vehicles,
            self.cfg,
            count,
            seed,
            discharge_headway=self.discharge_headway,
            merge_threshold=self.merge_threshold,
            resolution=self.resolution,
            per_sample_vehicles=per_sample_vehicles,
        )
        logger.debug(
            f"{self.cfg.id}: drew {count} sample(s) from {len(vehicles)} local vehicle(s)"
        )
        return sample_set

    def expected(self, vehicles: Sequence[DetectedVehicle]) -> SampleSet:
        sample = expected_inflow(
            vehicles,
            self.cfg,
            self.cfg.phase_model,
            self.discharge_headway,
            self.merge_threshold,
            self.resolution,
        )
        return SampleSet.single(sample)
