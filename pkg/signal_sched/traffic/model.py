"""Domain types shared by the sampler, scheduler, coordination and simulator."""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from ..exceptions import TurnNotPermittedError

RoadId = str
NodeId = str


@dataclass(frozen=True, order=True)
class TurnMovement:
    """A movement from an entry road to an exit road at one intersection."""

    entry: RoadId
    exit: RoadId

    def __str__(self) -> str:
        return f"{self.entry}->{self.exit}"


@dataclass(frozen=True)
class Phase:
    """A set of non-conflicting turns that share right-of-way."""

    turns: frozenset[TurnMovement]
    g_min: int  # seconds
    g_max: int  # seconds
    intergreen: int  # all-red seconds after this phase


@dataclass(frozen=True)
class PhaseModel:
    """Ordered cycle of phases."""

    phases: tuple[Phase, ...]

    def __len__(self) -> int:
        return len(self.phases)

    def __iter__(self) -> Iterator[Phase]:
        return iter(self.phases)

    def __getitem__(self, index: int) -> Phase:
        return self.phases[index]

    @property
    def permitted_turns(self) -> frozenset[TurnMovement]:
        turns: set[TurnMovement] = set()
        for phase in self.phases:
            turns |= phase.turns
        return frozenset(turns)

    def phase_for_turn(self, turn: TurnMovement) -> int:
        return phase_for_turn(self, turn)


def phase_for_turn(pm: PhaseModel, turn: TurnMovement) -> int:
    """Return the index of the unique phase serving ``turn``."""
    for index, phase in enumerate(pm.phases):
        if turn in phase.turns:
            return index
    raise TurnNotPermittedError(f"Turn {turn} is not permitted by any phase")


@dataclass(frozen=True)
class Road:
    """A directed road between two nodes (intersections or boundary nodes)."""

    id: RoadId
    length: float  # meters
    lanes: int
    from_node: NodeId
    to_node: NodeId

    def capacity(self, jam_spacing: float) -> int:
        """Number of vehicles the road holds at jam density."""
        return math.floor(self.length * self.lanes / jam_spacing)


@dataclass(frozen=True)
class IntersectionConfig:
    """Local context of one signalized intersection."""

    id: NodeId
    phase_model: PhaseModel
    turn_probabilities: Mapping[TurnMovement, float] = field(hash=False)
    entry_roads: tuple[RoadId, ...] = ()
    exit_roads: tuple[RoadId, ...] = ()

    def turn_row(self, entry: RoadId) -> list[tuple[RoadId, float]]:
        """Exit roads and probabilities for ``entry``, in configuration order."""
        return [
            (turn.exit, p)
            for turn, p in self.turn_probabilities.items()
            if turn.entry == entry
        ]

    def turns_from(self, entry: RoadId) -> list[TurnMovement]:
        return [turn for turn in self.turn_probabilities if turn.entry == entry]


@dataclass(frozen=True)
class NetworkTopology:
    """Intersections and roads of a network; neighbors derive from shared roads."""

    intersections: Mapping[NodeId, IntersectionConfig] = field(hash=False)
    roads: Mapping[RoadId, Road] = field(hash=False)

    def road(self, road_id: RoadId) -> Road:
        return self.roads[road_id]

    def is_sink(self, road_id: RoadId) -> bool:
        return self.roads[road_id].to_node not in self.intersections

    def downstream(self, road_id: RoadId) -> NodeId | None:
        """Intersection at the end of ``road_id``, or None for a sink."""
        to_node = self.roads[road_id].to_node
        return to_node if to_node in self.intersections else None

    def source_roads(self) -> list[RoadId]:
        """Roads that carry traffic from the boundary into the network."""
        return sorted(
            road.id
            for road in self.roads.values()
            if road.from_node not in self.intersections
            and road.to_node in self.intersections
        )

    def neighbors(self, intersection_id: NodeId) -> tuple[NodeId, ...]:
        cfg = self.intersections[intersection_id]
        found: set[NodeId] = set()
        for road_id in cfg.exit_roads:
            downstream = self.downstream(road_id)
            if downstream is not None:
                found.add(downstream)
        for road_id in cfg.entry_roads:
            upstream = self.roads[road_id].from_node
            if upstream in self.intersections:
                found.add(upstream)
        return tuple(sorted(found))

    def free_flow_time(self, route: tuple[RoadId, ...] | list[RoadId], speed: float) -> float:
        """Traversal time of every non-sink road of ``route`` at ``speed``."""
        return sum(
            self.roads[road_id].length / speed
            for road_id in route
            if not self.is_sink(road_id)
        )


@dataclass(frozen=True)
class InitialConditions:
    current_phase: int
    elapsed_green: int  # seconds of green already served by the current phase


@dataclass(frozen=True)
class ClusterMember:
    """One vehicle (or fractional vehicle copy) inside a cluster."""

    vehicle_id: str
    arrival: float
    exit_road: RoadId
    weight: float = 1.0


@dataclass(frozen=True)
class Cluster:
    """A platoon scheduled as one divisible job."""

    count: float  # vehicles, fractional in expected-inflow mode
    arrival: float
    length: float  # seconds of stop-line occupancy
    composition: tuple[ClusterMember, ...] = ()


@dataclass(frozen=True)
class InflowSample:
    """One realization of per-phase cluster sequences."""

    per_phase: tuple[tuple[Cluster, ...], ...]

    @classmethod
    def empty(cls, phase_count: int) -> InflowSample:
        return cls(per_phase=tuple(() for _ in range(phase_count)))

    @property
    def total_count(self) -> float:
        return sum(c.count for clusters in self.per_phase for c in clusters)

    def signature(self) -> tuple[tuple[tuple[float, float, float], ...], ...]:
        """Scheduling-relevant data only; equal signatures schedule identically."""
        return tuple(
            tuple((c.arrival, c.length, c.count) for c in clusters)
            for clusters in self.per_phase
        )


@dataclass(frozen=True)
class Interval:
    """Green interval of ``phase`` in ``cycle``; times in seconds on the grid."""

    phase: int
    cycle: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class SignalTimingPlan:
    """Green intervals over H cycles, in service order from the current phase.

    Cycle 0 starts with the phase that is green at the decision time, so the
    first interval is always the current phase.
    """

    intervals: tuple[Interval, ...]
    horizon_cycles: int
    decision_time: int = 0  # the "now" the plan was computed for

    @property
    def first(self) -> Interval:
        return self.intervals[0]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(iv.length for iv in self.intervals)

    @property
    def end(self) -> int:
        return self.intervals[-1].end

    def interval(self, phase: int, cycle: int) -> Interval:
        for iv in self.intervals:
            if iv.phase == phase and iv.cycle == cycle:
                return iv
        raise KeyError(f"No interval for phase {phase} in cycle {cycle}")

    def windows(self, phase: int) -> list[Interval]:
        return [iv for iv in self.intervals if iv.phase == phase]


@dataclass(frozen=True)
class Fragment:
    start: float
    length: float


# (sample, phase, cluster, cycle); cycle == horizon_cycles marks a spilled fragment
FragmentKey = tuple[int, int, int, int]


@dataclass(frozen=True)
class ClusterSchedule:
    """Per-sample departure fragments of every cluster."""

    fragments: Mapping[FragmentKey, Fragment] = field(hash=False)

    def for_cluster(self, sample: int, phase: int, cluster: int) -> list[tuple[int, Fragment]]:
        """Fragments of one cluster ordered by cycle."""
        return sorted(
            (
                (key[3], frag)
                for key, frag in self.fragments.items()
                if key[:3] == (sample, phase, cluster)
            ),
            key=lambda item: item[0],
        )


@dataclass(frozen=True)
class Extend:
    duration: int  # seconds, a positive multiple of the controller resolution


@dataclass(frozen=True)
class Terminate:
    pass


DecisionAction = Extend | Terminate
