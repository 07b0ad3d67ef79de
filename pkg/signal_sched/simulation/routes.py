"""Demand profiles, vehicle records and seeded route generation."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from loguru import logger

from ..traffic.model import NetworkTopology, NodeId, RoadId, TurnMovement

SHARE_TOLERANCE = 1e-9
MAX_ROUTE_HOPS = 200

ShareRow = tuple[float, float]  # (start time in seconds, share)
TurnProportions = Mapping[NodeId, Mapping[TurnMovement, float]]


@dataclass(frozen=True)
class SimConfig:
    tick: float = 0.5  # seconds
    speed: float = 10.0  # m/s
    vehicle_length: float = 5.0  # meters
    queue_gap: float = 2.0  # meters
    startup_lost_time: float = 3.5  # seconds
    saturation_headway_per_lane: float = 2.5  # seconds per vehicle on one lane
    seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "tick",
            "speed",
            "vehicle_length",
            "queue_gap",
            "startup_lost_time",
            "saturation_headway_per_lane",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"Configuration Error: {name} must be positive")
        if abs(round(1 / self.tick) * self.tick - 1.0) > 1e-9:
            raise ValueError(
                f"Configuration Error: tick {self.tick} must divide the 1 s controller grid"
            )

    @property
    def jam_spacing(self) -> float:
        return self.vehicle_length + self.queue_gap

    @property
    def ticks_per_second(self) -> int:
        return round(1 / self.tick)


@dataclass(frozen=True)
class DemandProfile:
    """Distribution of total demand over source roads and time.

    ``entry_shares`` maps each source road to a piecewise-constant share table
    of ``(start, share)`` rows; the first row of every road starts at 0.
    """

    total_demand: float  # vehicles/hour at the nominal level
    entry_shares: Mapping[RoadId, tuple[ShareRow, ...]] = field(hash=False)
    generation_duration: float = 900.0

    def __post_init__(self) -> None:
        if self.generation_duration <= 0:
            raise ValueError("Configuration Error: generation_duration must be positive")
        if not self.entry_shares:
            raise ValueError("Configuration Error: demand profile has no entry roads")
        for road_id, rows in self.entry_shares.items():
            if not rows or rows[0][0] != 0:
                raise ValueError(
                    f"Configuration Error: share table of {road_id} must start at t=0"
                )
        for t in self.breakpoints():
            total = math.fsum(self.share_at(road_id, t) for road_id in self.entry_shares)
            if abs(total - 1.0) > SHARE_TOLERANCE:
                raise ValueError(
                    f"Configuration Error: entry shares at t={t} sum to {total:.9g}"
                )

    @classmethod
    def uniform(
        cls, roads: list[RoadId], total_demand: float, generation_duration: float = 900.0
    ) -> DemandProfile:
        share = 1.0 / len(roads)
        shares = {road_id: ((0.0, share),) for road_id in roads}
        return cls(total_demand, shares, generation_duration)

    def breakpoints(self) -> list[float]:
        return sorted({row[0] for rows in self.entry_shares.values() for row in rows})

    def share_at(self, road_id: RoadId, t: float) -> float:
        share = 0.0
        for start, value in self.entry_shares[road_id]:
            if start > t:
                break
            share = value
        return share


class VehicleState(StrEnum):
    PENDING = "pending"  # spawned but not yet admitted onto its source road
    MOVING = "moving"
    QUEUED = "queued"
    DISCHARGING = "discharging"
    EXITED = "exited"


@dataclass
class SimVehicle:
    id: str
    route: tuple[RoadId, ...]
    spawn_time: float
    position: float = 0.0  # meters along the current road
    state: VehicleState = VehicleState.PENDING
    exit_time: float | None = None
    road_index: int = 0
    entered_at: float = 0.0  # time the vehicle entered its current road

    @property
    def road(self) -> RoadId:
        return self.route[self.road_index]

    @property
    def next_road(self) -> RoadId | None:
        index = self.road_index + 1
        return self.route[index] if index < len(self.route) else None


def _extend_route(
    topology: NetworkTopology,
    proportions: TurnProportions,
    source: RoadId,
    rng: np.random.Generator,
) -> tuple[RoadId, ...]:
    route = [source]
    current = source
    for _ in range(MAX_ROUTE_HOPS):
        node = topology.downstream(current)
        if node is None:
            return tuple(route)
        row = [(turn.exit, p) for turn, p in proportions[node].items() if turn.entry == current]
        if not row:
            raise ValueError(f"Road {current} has no turn proportions at {node}")
        exits = [exit_road for exit_road, _ in row]
        cumulative = np.cumsum([p for _, p in row])
        index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
        current = exits[min(index, len(exits) - 1)]
        route.append(current)
    raise ValueError(f"Route from {source} did not reach a sink within {MAX_ROUTE_HOPS} hops")


def generate_routes(
    topology: NetworkTopology,
    demand: DemandProfile,
    turn_proportions: TurnProportions | None,
    level: float,
    seed: int,
) -> list[SimVehicle]:
    """Poisson spawns per source road, routes sampled from static turn proportions.

    Within each constant-share segment the spawn count is Poisson with mean
    ``rate * duration`` and spawn times are uniform over the segment. Vehicles
    are numbered in spawn order.
    """
    if level <= 0:
        raise ValueError("Demand level must be positive")
    proportions: TurnProportions = turn_proportions or {
        node: cfg.turn_probabilities for node, cfg in topology.intersections.items()
    }
    rng = np.random.default_rng(seed)
    horizon = demand.generation_duration
    bounds = [t for t in demand.breakpoints() if t < horizon] + [horizon]

    spawns: list[tuple[float, RoadId]] = []
    for road_id in sorted(demand.entry_shares):
        for start, end in zip(bounds[:-1], bounds[1:], strict=True):
            rate = level / 3600.0 * demand.share_at(road_id, start)
            if rate <= 0:
                continue
            count = int(rng.poisson(rate * (end - start)))
            spawns.extend((float(t), road_id) for t in rng.uniform(start, end, count))
    spawns.sort()

    vehicles = [
        SimVehicle(
            id=f"v{index:05d}",
            route=_extend_route(topology, proportions, road_id, rng),
            spawn_time=spawn_time,
        )
        for index, (spawn_time, road_id) in enumerate(spawns)
    ]
    logger.debug(f"Generated {len(vehicles)} vehicles at {level:g} vph (seed {seed})")
    return vehicles
