"""Built-in evaluation networks: an isolated intersection, an arterial and a grid.

Every intersection is a four-way crossing. Sides are indexed N=0, E=1, S=2, W=3;
a vehicle entering from side ``i`` goes straight to side ``i+2``, turns right to
side ``i+3`` and left to side ``i+1`` (mod 4). Roads are named ``<from>_<to>``.
Boundary nodes carry the side letter and, where needed, a position index.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import StrEnum

from loguru import logger

from ..exceptions import UnknownScenarioError
from ..schemas import ScenarioDefaults
from ..simulation.routes import DemandProfile, TurnProportions
from ..traffic.model import (
    IntersectionConfig,
    NetworkTopology,
    NodeId,
    Phase,
    PhaseModel,
    Road,
    RoadId,
    TurnMovement,
)

SIDES = ("N", "E", "S", "W")


class Movement(StrEnum):
    STRAIGHT = "straight"
    LEFT = "left"
    RIGHT = "right"

    def exit_side(self, side: int) -> int:
        offset = {Movement.STRAIGHT: 2, Movement.LEFT: 1, Movement.RIGHT: 3}[self]
        return (side + offset) % 4


NORTH_SOUTH = (0, 2)
EAST_WEST = (1, 3)
THROUGH_RIGHT = (Movement.STRAIGHT, Movement.RIGHT)

# A phase design lists, per phase, the sides it serves and the movements it allows.
PhaseDesign = tuple[tuple[tuple[int, ...], tuple[Movement, ...]], ...]

TWO_PHASE: PhaseDesign = ((NORTH_SOUTH, THROUGH_RIGHT), (EAST_WEST, THROUGH_RIGHT))
THREE_PHASE: PhaseDesign = (
    (EAST_WEST, THROUGH_RIGHT),
    (EAST_WEST, (Movement.LEFT,)),
    (NORTH_SOUTH, THROUGH_RIGHT),
)
FOUR_PHASE: PhaseDesign = (
    (NORTH_SOUTH, THROUGH_RIGHT),
    (NORTH_SOUTH, (Movement.LEFT,)),
    (EAST_WEST, THROUGH_RIGHT),
    (EAST_WEST, (Movement.LEFT,)),
)

Split = Mapping[Movement, float]
STRAIGHT_ONLY: Split = {Movement.STRAIGHT: 1.0}
ISOLATED_SPLIT: Split = {Movement.STRAIGHT: 0.6, Movement.LEFT: 0.2, Movement.RIGHT: 0.2}
ONE_TURN_RIGHT: Split = {Movement.STRAIGHT: 0.8, Movement.RIGHT: 0.2}
BOTH_TURNS: Split = {Movement.STRAIGHT: 0.65, Movement.LEFT: 0.15, Movement.RIGHT: 0.2}


@dataclass(frozen=True)
class Scenario:
    name: str
    topology: NetworkTopology
    demand: DemandProfile
    demand_levels: tuple[float, ...]
    defaults: ScenarioDefaults = field(default_factory=ScenarioDefaults)
    turn_proportions: TurnProportions = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        if not self.demand_levels:
            raise ValueError(f"Scenario {self.name} has no demand levels")
        if any(level <= 0 for level in self.demand_levels):
            raise ValueError(f"Scenario {self.name} has a non-positive demand level")
        if not self.turn_proportions:
            object.__setattr__(
                self,
                "turn_proportions",
                {
                    node: dict(cfg.turn_probabilities)
                    for node, cfg in sorted(self.topology.intersections.items())
                },
            )

    def with_defaults(self, **overrides: float) -> Scenario:
        """Copy with some defaults replaced; green bounds and intergreen are rewritten
        into every phase of every intersection."""
        if not overrides:
            return self
        defaults = ScenarioDefaults.model_validate({**self.defaults.model_dump(), **overrides})
        topology = self.topology
        if {"g_min", "g_max", "intergreen"} & overrides.keys():
            topology = _retime(topology, defaults)
        return replace(self, topology=topology, defaults=defaults, turn_proportions={})

    def with_generation_duration(self, duration: float) -> Scenario:
        demand = DemandProfile(self.demand.total_demand, self.demand.entry_shares, duration)
        return replace(self, demand=demand)


def _retime(topology: NetworkTopology, defaults: ScenarioDefaults) -> NetworkTopology:
    intersections = {
        node: replace(
            cfg,
            phase_model=PhaseModel(
                tuple(
                    Phase(phase.turns, defaults.g_min, defaults.g_max, defaults.intergreen)
                    for phase in cfg.phase_model
                )
            ),
        )
        for node, cfg in topology.intersections.items()
    }
    return NetworkTopology(intersections=intersections, roads=topology.roads)


def road_id(from_node: NodeId, to_node: NodeId) -> RoadId:
    return f"{from_node}_{to_node}"


def four_way(
    node: NodeId,
    neighbors: Sequence[NodeId],
    design: PhaseDesign,
    splits: Sequence[Split],
    defaults: ScenarioDefaults,
) -> IntersectionConfig:
    """An intersection whose side ``i`` connects to ``neighbors[i]``.

    ``splits[i]`` gives the movement probabilities for traffic entering from side
    ``i``. A movement is permitted when its split is positive; it must then be
    served by some phase of ``design``.
    """
    entries = [road_id(other, node) for other in neighbors]
    exits = [road_id(node, other) for other in neighbors]

    probabilities: dict[TurnMovement, float] = {}
    for side, split in enumerate(splits):
        for movement, p in split.items():
            if p > 0:
                probabilities[TurnMovement(entries[side], exits[movement.exit_side(side)])] = p

    phases = []
    for sides, movements in design:
        turns = frozenset(
            TurnMovement(entries[side], exits[movement.exit_side(side)])
            for side in sides
            for movement in movements
            if splits[side].get(movement, 0.0) > 0
        )
        phases.append(Phase(turns, defaults.g_min, defaults.g_max, defaults.intergreen))

    return IntersectionConfig(
        id=node,
        phase_model=PhaseModel(tuple(phases)),
        turn_probabilities=probabilities,
        entry_roads=tuple(entries),
        exit_roads=tuple(exits),
    )


def _roads_around(
    node: NodeId,
    neighbors: Sequence[NodeId],
    lengths: Sequence[float],
    lanes: Sequence[int],
) -> dict[RoadId, Road]:
    roads: dict[RoadId, Road] = {}
    for other, length, lane_count in zip(neighbors, lengths, lanes, strict=True):
        roads[road_id(other, node)] = Road(road_id(other, node), length, lane_count, other, node)
        roads[road_id(node, other)] = Road(road_id(node, other), length, lane_count, node, other)
    return roads


def build_isolated(defaults: ScenarioDefaults | None = None) -> Scenario:
    """Four-phase, two-lane, two-way intersection with 300 m approaches."""
    defaults = defaults or ScenarioDefaults()
    node = "I"
    neighbors = list(SIDES)
    roads = _roads_around(node, neighbors, [300.0] * 4, [2] * 4)
    cfg = four_way(node, neighbors, FOUR_PHASE, [ISOLATED_SPLIT] * 4, defaults)
    topology = NetworkTopology(intersections={node: cfg}, roads=roads)
    return Scenario(
        name="isolated",
        topology=topology,
        demand=DemandProfile.uniform(topology.source_roads(), 900.0),
        demand_levels=(900.0, 1350.0, 1800.0),
        defaults=defaults,
    )


ARTERIAL_LENGTH = 250.0
ARTERIAL_BOTTLENECK = 2


def build_arterial(defaults: ScenarioDefaults | None = None) -> Scenario:
    """Five intersections west to east along a two-lane main road.

    Turns are permitted only at the middle, three-phase intersection: main-road
    approaches go through, left and right; side streets go through or right.
    Every other intersection is a two-phase through-only crossing.
    """
    defaults = defaults or ScenarioDefaults()
    count = 5
    nodes = [f"A{c}" for c in range(count)]
    intersections: dict[NodeId, IntersectionConfig] = {}
    roads: dict[RoadId, Road] = {}
    for c, node in enumerate(nodes):
        west = nodes[c - 1] if c > 0 else "W"
        east = nodes[c + 1] if c < count - 1 else "E"
        neighbors = [f"N{c}", east, f"S{c}", west]
        side_roads = _roads_around(node, neighbors, [ARTERIAL_LENGTH] * 4, [1, 2, 1, 2])
        for rid, road in side_roads.items():
            roads.setdefault(rid, road)
        if c == ARTERIAL_BOTTLENECK:
            splits = [ONE_TURN_RIGHT, BOTH_TURNS, ONE_TURN_RIGHT, BOTH_TURNS]
            intersections[node] = four_way(node, neighbors, THREE_PHASE, splits, defaults)
        else:
            intersections[node] = four_way(node, neighbors, TWO_PHASE, [STRAIGHT_ONLY] * 4, defaults)
    topology = NetworkTopology(intersections=intersections, roads=roads)
    return Scenario(
        name="arterial_1x5",
        topology=topology,
        demand=DemandProfile.uniform(topology.source_roads(), 900.0),
        demand_levels=(900.0, 1200.0, 1500.0),
        defaults=defaults,
    )


GRID_SIZE = 5
GRID_LENGTH = 75.0
GRID_SHORT_LENGTH = 25.0
GRID_BOUNDARY_LENGTH = 150.0
GRID_FOUR_PHASE = frozenset({(1, 1), (1, 3), (2, 2), (3, 1), (3, 3)})


def _grid_node(row: int, col: int) -> NodeId:
    return f"G{row}{col}"


def _grid_length(row: int, col: int, side: int) -> float:
    """Length of the two-way link on ``side`` of the intersection at ``(row, col)``.

    The short set is the vertical links between rows 1 and 2 in the inner columns.
    The long set is the western boundary links.
    """
    if side == 3 and col == 0:
        return GRID_BOUNDARY_LENGTH
    upper_row = row - 1 if side == 0 else row if side == 2 else None
    if upper_row == 1 and 1 <= col <= GRID_SIZE - 2:
        return GRID_SHORT_LENGTH
    return GRID_LENGTH


def build_grid(defaults: ScenarioDefaults | None = None) -> Scenario:
    """5x5 grid of two-lane roads, mostly two-phase, with five four-phase crossings.

    Four-phase intersections permit through, left and right from every approach.
    Two-phase intersections permit through and right turns.
    """
    defaults = defaults or ScenarioDefaults()
    intersections: dict[NodeId, IntersectionConfig] = {}
    roads: dict[RoadId, Road] = {}
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            node = _grid_node(row, col)
            neighbors = [
                _grid_node(row - 1, col) if row > 0 else f"N{col}",
                _grid_node(row, col + 1) if col < GRID_SIZE - 1 else f"E{row}",
                _grid_node(row + 1, col) if row < GRID_SIZE - 1 else f"S{col}",
                _grid_node(row, col - 1) if col > 0 else f"W{row}",
            ]
            lengths = [_grid_length(row, col, side) for side in range(4)]
            for rid, road in _roads_around(node, neighbors, lengths, [2] * 4).items():
                roads.setdefault(rid, road)
            if (row, col) in GRID_FOUR_PHASE:
                intersections[node] = four_way(node, neighbors, FOUR_PHASE, [BOTH_TURNS] * 4, defaults)
            else:
                intersections[node] = four_way(
                    node, neighbors, TWO_PHASE, [ONE_TURN_RIGHT] * 4, defaults
                )
    topology = NetworkTopology(intersections=intersections, roads=roads)
    return Scenario(
        name="grid_5x5",
        topology=topology,
        demand=DemandProfile.uniform(topology.source_roads(), 4000.0),
        demand_levels=(4000.0, 5000.0, 6000.0),
        defaults=defaults,
    )


BUILDERS = {
    "isolated": build_isolated,
    "arterial_1x5": build_arterial,
    "grid_5x5": build_grid,
}


def build_scenario(name: str, defaults: ScenarioDefaults | None = None) -> Scenario:
    builder = BUILDERS.get(name)
    if builder is None:
        raise UnknownScenarioError(
            f"Unknown scenario '{name}'. Available: {', '.join(sorted(BUILDERS))}"
        )
    scenario = builder(defaults)
    logger.debug(
        f"Built scenario {name}: {len(scenario.topology.intersections)} intersection(s), "
        f"{len(scenario.topology.roads)} roads"
    )
    return scenario
