"""Mesoscopic network state and its fixed-tick update."""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from ..sampling.sampler import DetectedVehicle
from ..traffic.model import NetworkTopology, NodeId, RoadId, TurnMovement
from .routes import SimConfig, SimVehicle, VehicleState
from .signals import SignalHead


@dataclass
class RoadState:
    """Vehicles on one road in entry order, plus the stop-line discharge gate."""

    road_id: RoadId
    length: float
    lanes: int
    capacity: int
    headway: float  # seconds between crossings at saturation flow
    vehicles: deque[SimVehicle] = field(default_factory=deque)
    next_discharge: float = 0.0

    @property
    def is_full(self) -> bool:
        return len(self.vehicles) >= self.capacity


class World:
    """Roads, vehicles and signal heads of one episode.

    Each road keeps its vehicles in entry order and discharges per movement:
    the first vehicle whose movement is green crosses the stop line once the
    saturation gate has opened and it has reached the stop line at free-flow
    speed. Vehicles waiting on a red movement, or on a full next road, hold
    their place without blocking other movements. Crossing onto a sink road
    removes the vehicle from the network.
    """

    def __init__(
        self,
        topology: NetworkTopology,
        vehicles: Sequence[SimVehicle],
        cfg: SimConfig,
    ):
        self.topology = topology
        self.cfg = cfg
        self.time = 0.0
        self.vehicles = list(vehicles)
        self.by_id = {v.id: v for v in self.vehicles}
        self.pending: deque[SimVehicle] = deque(sorted(self.vehicles, key=lambda v: (v.spawn_time, v.id)))
        self.waiting: dict[RoadId, deque[SimVehicle]] = {}
        self.exited: list[SimVehicle] = []
        self.last_exit_time = 0.0

        self.roads: dict[RoadId, RoadState] = {}
        for road in topology.roads.values():
            if topology.is_sink(road.id):
                continue
            self.roads[road.id] = RoadState(
                road_id=road.id,
                length=road.length,
                lanes=road.lanes,
                capacity=max(1, road.capacity(cfg.jam_spacing)),
                headway=cfg.saturation_headway_per_lane / road.lanes,
            )

        self.signals = {
            node: SignalHead(node, intersection.phase_model)
            for node, intersection in sorted(topology.intersections.items())
        }
        self._turn_phase: dict[TurnMovement, int] = {}
        for intersection in topology.intersections.values():
            for k, phase in enumerate(intersection.phase_model):
                for turn in phase.turns:
                    self._turn_phase[turn] = k
        for head in self.signals.values():
            self.on_green_onset(head.intersection_id, head.phase, head.green_start)

    @property
    def vehicles_in(self) -> int:
        return len(self.vehicles)

    @property
    def vehicles_out(self) -> int:
        return len(self.exited)

    @property
    def done(self) -> bool:
        return len(self.exited) == len(self.vehicles)

    def in_network(self) -> int:
        return sum(len(road.vehicles) for road in self.roads.values())

    def on_green_onset(self, node: NodeId, phase: int, onset: float) -> None:
        """Restart the discharge gate of every approach the new phase serves."""
        phase_model = self.topology.intersections[node].phase_model
        for entry in sorted({turn.entry for turn in phase_model[phase].turns}):
            self.roads[entry].next_discharge = onset + self.cfg.startup_lost_time

    def stopline_arrival(self, vehicle: SimVehicle) -> float:
        return vehicle.entered_at + self.roads[vehicle.road].length / self.cfg.speed

    def has_crossed(self, vehicle_id: str, node: NodeId) -> bool:
        """True once the vehicle has left ``node`` or the network."""
        vehicle = self.by_id[vehicle_id]
        if vehicle.state is VehicleState.EXITED:
            return True
        if vehicle.state is VehicleState.PENDING:
            return False
        for index in range(vehicle.road_index):
            if self.topology.road(vehicle.route[index]).to_node == node:
                return True
        return False

    def observe(self, node: NodeId, now: float) -> list[DetectedVehicle]:
        """Exact detection over the full length of every incoming road."""
        detected: list[DetectedVehicle] = []
        for entry in self.topology.intersections[node].entry_roads:
            for vehicle in self.roads[entry].vehicles:
                if vehicle.state in (VehicleState.QUEUED, VehicleState.DISCHARGING):
                    eta = now
                else:
                    eta = max(now, self.stopline_arrival(vehicle))
                detected.append(DetectedVehicle(vehicle.id, entry, eta))
        return detected

    def step(self, dt: float) -> None:
        """Advance the world over ``[time, time + dt)``."""
        end = self.time + dt
        self._admit(end)
        for node in sorted(self.signals):
            self._discharge(node, end)
        self._update_positions(end)
        self.time = end

    def _admit(self, end: float) -> None:
        while self.pending and self.pending[0].spawn_time < end:
            vehicle = self.pending.popleft()
            self.waiting.setdefault(vehicle.route[0], deque()).append(vehicle)
        for road_id in sorted(self.waiting):
            queue = self.waiting[road_id]
            road = self.roads[road_id]
            while queue and not road.is_full:
                vehicle = queue.popleft()
                vehicle.entered_at = max(vehicle.spawn_time, self.time)
                vehicle.state = VehicleState.MOVING
                vehicle.position = 0.0
                road.vehicles.append(vehicle)

    def _discharge(self, node: NodeId, end: float) -> None:
        head = self.signals[node]
        for entry in self.topology.intersections[node].entry_roads:
            road = self.roads[entry]
            held: deque[SimVehicle] = deque()
            spilled: set[RoadId] = set()
            while road.vehicles:
                vehicle = road.vehicles.popleft()
                next_road = vehicle.next_road
                if (
                    next_road is None
                    or next_road in spilled
                    or not head.is_green(self._turn_phase[TurnMovement(vehicle.road, next_road)])
                ):
                    held.append(vehicle)
                    continue
                gate = max(road.next_discharge, self.stopline_arrival(vehicle), self.time)
                if gate >= end:
                    held.append(vehicle)
                    held.extend(road.vehicles)
                    road.vehicles.clear()
                    break
                downstream = self.roads.get(next_road)
                if downstream is not None and downstream.is_full:
                    spilled.add(next_road)
                    held.append(vehicle)
                    continue
                road.next_discharge = gate + road.headway
                self._cross(vehicle, downstream, gate)
            road.vehicles = held

    def _cross(self, vehicle: SimVehicle, downstream: RoadState | None, at: float) -> None:
        vehicle.road_index += 1
        vehicle.entered_at = at
        vehicle.position = 0.0
        if downstream is None:
            vehicle.state = VehicleState.EXITED
            vehicle.exit_time = at
            self.exited.append(vehicle)
            self.last_exit_time = max(self.last_exit_time, at)
            return
        vehicle.state = VehicleState.MOVING
        downstream.vehicles.append(vehicle)

    def _update_positions(self, end: float) -> None:
        for road in self.roads.values():
            queued = 0
            for vehicle in road.vehicles:
                back = road.length - (queued // road.lanes) * self.cfg.jam_spacing
                travelled = (end - vehicle.entered_at) * self.cfg.speed
                if travelled >= back:
                    vehicle.position = max(0.0, back)
                    queued += 1
                    vehicle.state = (
                        VehicleState.DISCHARGING
                        if self._movement_green(vehicle)
                        else VehicleState.QUEUED
                    )
                else:
                    vehicle.position = travelled
                    vehicle.state = VehicleState.MOVING

    def _movement_green(self, vehicle: SimVehicle) -> bool:
        next_road = vehicle.next_road
        node = self.topology.road(vehicle.road).to_node
        if next_road is None or node not in self.signals:
            return False
        return self.signals[node].is_green(self._turn_phase[TurnMovement(vehicle.road, next_road)])

    def occupancy(self) -> dict[RoadId, int]:
        return {road_id: len(road.vehicles) for road_id, road in sorted(self.roads.items())}

    def queue_lengths(self) -> dict[RoadId, int]:
        """Vehicles standing at or behind each stop line."""
        stopped = (VehicleState.QUEUED, VehicleState.DISCHARGING)
        return {
            road_id: sum(1 for v in road.vehicles if v.state in stopped)
            for road_id, road in sorted(self.roads.items())
        }

    def vehicle_records(self) -> Iterable[SimVehicle]:
        return sorted(self.vehicles, key=lambda v: v.id)

    def route_free_flow(self, vehicle: SimVehicle) -> float:
        return self.topology.free_flow_time(vehicle.route, self.cfg.speed)

    def delay(self, vehicle: SimVehicle) -> float:
        if vehicle.exit_time is None:
            return math.nan
        return vehicle.exit_time - vehicle.spawn_time - self.route_free_flow(vehicle)
