"""Decision-round loop that couples controllers to the simulated network."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from loguru import logger

from ..coordination.bus import MessageBus
from ..exceptions import SimulationStalledError
from ..traffic.model import InitialConditions, NetworkTopology
from .controller import ControllerKind, ControllerParams, IntersectionController
from .metrics import RunMetrics, VehicleRecord
from .monitor import EpisodeMonitor
from .routes import SimConfig, SimVehicle, VehicleState
from .signals import SignalState, TraceRow
from .world import World

DEFAULT_STALL_LIMIT = 900.0


def run_episode(
    topology: NetworkTopology,
    vehicles: Sequence[SimVehicle],
    controller: ControllerKind,
    controller_params: ControllerParams,
    sim_config: SimConfig,
    *,
    stall_limit: float = DEFAULT_STALL_LIMIT,
    trace: bool = False,
    message_log: Path | None = None,
) -> RunMetrics:
    """Simulate until every vehicle has left the network.

    At every whole second each intersection that is green and due for a
    decision observes its approaches, solves and applies an extend/terminate
    action. In coordinated modes outflow messages published in one round are
    read in the next. Solve time never advances simulated time.
    """
    fresh = [
        replace(
            v,
            state=VehicleState.PENDING,
            road_index=0,
            exit_time=None,
            position=0.0,
            entered_at=0.0,
        )
        for v in vehicles
    ]
    world = World(topology, fresh, sim_config)
    controllers = {
        node: IntersectionController(
            node=node,
            index=index,
            topology=topology,
            kind=controller,
            params=controller_params,
            speed=sim_config.speed,
            headway_per_lane=sim_config.saturation_headway_per_lane,
            episode_seed=sim_config.seed,
        )
        for index, node in enumerate(sorted(topology.intersections))
    }
    bus = MessageBus(message_log) if controller.coordinated else None
    trace_rows: list[TraceRow] = []
    per_second = sim_config.ticks_per_second
    tick_index = 0
    idle_since = 0.0
    exited = 0

    logger.info(
        f"Episode start: {len(fresh)} vehicles, {len(controllers)} intersection(s), "
        f"controller {controller.value}"
    )
    monitor = EpisodeMonitor()
    try:
        while not world.done:
            if tick_index % per_second == 0:
                now = tick_index // per_second
                _decision_round(world, controllers, bus, now)
                monitor.after_round(now, world, sum(c.stats.nodes for c in controllers.values()))
            if trace:
                trace_rows.extend(head.trace_row(world.time) for head in world.signals.values())
            world.step(sim_config.tick)
            monitor.after_tick(world)
            tick_index += 1

            if world.vehicles_out > exited or world.in_network() == 0:
                exited = world.vehicles_out
                idle_since = world.time
            elif world.time - idle_since > stall_limit:
                raise SimulationStalledError(
                    f"No vehicle left the network for {stall_limit:g}s (t={world.time:g})",
                    diagnostics={
                        "time": world.time,
                        "vehicles_out": world.vehicles_out,
                        "vehicles_in_network": world.in_network(),
                        "busiest_roads": sorted(
                            world.occupancy().items(), key=lambda item: (-item[1], item[0])
                        )[:5],
                        "signals": {
                            node: (head.phase, head.state.value)
                            for node, head in world.signals.items()
                        },
                    },
                )
    finally:
        if bus is not None:
            bus.close()
    monitor.finish()

    records = tuple(
        VehicleRecord(
            id=v.id,
            spawn=v.spawn_time,
            exit=v.exit_time if v.exit_time is not None else float("nan"),
            delay=world.delay(v),
        )
        for v in world.vehicle_records()
    )
    metrics = RunMetrics(
        vehicles=records,
        vehicles_in=world.vehicles_in,
        vehicles_out=world.vehicles_out,
        end_time=world.time,
        planning={node: c.stats for node, c in controllers.items()},
        trace=tuple(trace_rows),
    )
    logger.info(
        f"Episode end at t={world.time:g}: {metrics.vehicles_out}/{metrics.vehicles_in} vehicles, "
        f"mean delay {metrics.mean_delay:.3f}s, {metrics.total('solves')} solves"
    )
    return metrics


def _decision_round(
    world: World,
    controllers: dict[str, IntersectionController],
    bus: MessageBus | None,
    now: int,
) -> None:
    for node, head in world.signals.items():
        if head.advance(now):
            world.on_green_onset(node, head.phase, head.green_start)

    for node in sorted(controllers):
        head = world.signals[node]
        controller = controllers[node]
        if head.state is SignalState.GREEN and now >= head.next_decision:
            action = controller.decide(
                now,
                InitialConditions(head.phase, head.elapsed_green(now)),
                world.observe(node, now),
                bus.inbox(node) if bus is not None else (),
            )
            head.apply(action, now)
            if bus is not None:
                bus.publish(controller.last_messages)
        elif bus is not None:
            bus.publish(controller.refresh_messages(lambda vid, n=node: world.has_crossed(vid, n)))

    if bus is not None:
        bus.barrier()
