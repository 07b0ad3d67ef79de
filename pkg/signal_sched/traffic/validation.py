"""Configuration checks for network topologies and phase models."""

import math
from collections import defaultdict
from dataclasses import dataclass

from loguru import logger

from .model import IntersectionConfig, NetworkTopology, TurnMovement

PROBABILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Violation:
    """A broken configuration rule."""

    entity: str  # e.g. "intersection:I", "road:N_in", "turn:N_in->S_out"
    rule: str
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.entity}: {self.message}"


def validate_network(topology: NetworkTopology) -> list[Violation]:
    """Return every rule violation in ``topology``; an empty list means valid."""
    violations: list[Violation] = []

    for road in topology.roads.values():
        if road.length <= 0:
            violations.append(
                Violation(f"road:{road.id}", "road.length", f"length {road.length} must be > 0")
            )
        if road.lanes < 1:
            violations.append(
                Violation(f"road:{road.id}", "road.lanes", f"lanes {road.lanes} must be >= 1")
            )

    entry_owners: dict[str, list[str]] = defaultdict(list)
    for cfg in topology.intersections.values():
        for road_id in cfg.entry_roads:
            entry_owners[road_id].append(cfg.id)

    for cfg in topology.intersections.values():
        violations.extend(_check_incidence(cfg, topology))
        violations.extend(_check_phases(cfg))
        violations.extend(_check_turns(cfg))
        violations.extend(_check_exit_targets(cfg, topology, entry_owners))

    if violations:
        logger.debug(f"Network validation found {len(violations)} violation(s)")
    return violations


def _check_incidence(cfg: IntersectionConfig, topology: NetworkTopology) -> list[Violation]:
    found: list[Violation] = []
    entity = f"intersection:{cfg.id}"
    for road_id in cfg.entry_roads:
        road = topology.roads.get(road_id)
        if road is None:
            found.append(Violation(entity, "road.unknown", f"entry road {road_id} is not defined"))
        elif road.to_node != cfg.id:
            found.append(
                Violation(entity, "road.incidence", f"entry road {road_id} ends at {road.to_node}")
            )
    for road_id in cfg.exit_roads:
        road = topology.roads.get(road_id)
        if road is None:
            found.append(Violation(entity, "road.unknown", f"exit road {road_id} is not defined"))
        elif road.from_node != cfg.id:
            found.append(
                Violation(entity, "road.incidence", f"exit road {road_id} starts at {road.from_node}")
            )
    return found


def _check_phases(cfg: IntersectionConfig) -> list[Violation]:
    found: list[Violation] = []
    pm = cfg.phase_model
    if not pm.phases:
        return [Violation(f"intersection:{cfg.id}", "phase_model.empty", "no phases defined")]

    owner: dict[TurnMovement, int] = {}
    for index, phase in enumerate(pm.phases):
        entity = f"intersection:{cfg.id}/phase:{index}"
        if not 0 < phase.g_min <= phase.g_max:
            found.append(
                Violation(
                    entity,
                    "phase.bounds",
                    f"green bounds g_min={phase.g_min}, g_max={phase.g_max} violate 0 < g_min <= g_max",
                )
            )
        if phase.intergreen < 0:
            found.append(
                Violation(entity, "phase.intergreen", f"intergreen {phase.intergreen} is negative")
            )
        for turn in sorted(phase.turns):
            if turn in owner:
                found.append(
                    Violation(
                        f"turn:{turn}",
                        "phase_model.disjoint",
                        f"served by phases {owner[turn]} and {index}",
                    )
                )
            else:
                owner[turn] = index

    permitted = set(cfg.turn_probabilities)
    for turn in sorted(permitted - owner.keys()):
        found.append(
            Violation(f"turn:{turn}", "phase_model.coverage", f"permitted turn {turn} is in no phase")
        )
    for turn in sorted(owner.keys() - permitted):
        found.append(
            Violation(
                f"turn:{turn}",
                "phase_model.unknown_turn",
                f"phase {owner[turn]} serves {turn} which has no turn probability",
            )
        )
    return found


def _check_turns(cfg: IntersectionConfig) -> list[Violation]:
    found: list[Violation] = []
    rows: dict[str, list[float]] = defaultdict(list)
    for turn, probability in cfg.turn_probabilities.items():
        entity = f"turn:{turn}"
        if turn.entry == turn.exit:
            found.append(Violation(entity, "turn.distinct", "entry and exit road are the same"))
        if turn.entry not in cfg.entry_roads or turn.exit not in cfg.exit_roads:
            found.append(
                Violation(entity, "turn.incidence", f"roads are not incident to intersection {cfg.id}")
            )
        if not 0.0 <= probability <= 1.0:
            found.append(
                Violation(entity, "turn.probability_range", f"probability {probability} outside [0, 1]")
            )
        rows[turn.entry].append(probability)

    for road_id in cfg.entry_roads:
        if road_id not in rows:
            found.append(
                Violation(f"road:{road_id}", "turn.missing_row", "entry road has no turn probabilities")
            )
            continue
        total = math.fsum(rows[road_id])
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            found.append(
                Violation(
                    f"road:{road_id}",
                    "turn.probability_sum",
                    f"turn probabilities of entry road {road_id} sum to {total:.9g}",
                )
            )
    return found


def _check_exit_targets(
    cfg: IntersectionConfig,
    topology: NetworkTopology,
    entry_owners: dict[str, list[str]],
) -> list[Violation]:
    found: list[Violation] = []
    for road_id in cfg.exit_roads:
        road = topology.roads.get(road_id)
        if road is None or topology.is_sink(road_id):
            continue
        owners = entry_owners.get(road_id, [])
        if owners != [road.to_node]:
            found.append(
                Violation(
                    f"road:{road_id}",
                    "road.exit_target",
                    f"exit road must feed exactly one neighbor; entry road of {owners or 'none'}",
                )
            )
    return found
