"""Scenario and sweep files in YAML, TOML or JSON."""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import toml
import yaml
from loguru import logger
from pydantic import ValidationError

from ..exceptions import ScenarioFileError, UnknownScenarioError
from ..schemas import (
    DemandSpec,
    IntersectionSpec,
    PhaseSpec,
    RoadSpec,
    ScenarioFile,
    ShareRowSpec,
    SweepFile,
    TurnSpec,
)
from ..simulation.routes import DemandProfile
from ..traffic.model import (
    IntersectionConfig,
    NetworkTopology,
    Phase,
    PhaseModel,
    Road,
    TurnMovement,
)
from .scenarios import BUILDERS, Scenario, build_scenario

SUPPORTED_FORMATS = {
    ".json": "json",
    ".yaml": "yaml",
    ".yml": "yaml",
    ".toml": "toml",
}


def _parse_json(text: str) -> Any:
    return json.loads(text)


def _parse_yaml(text: str) -> Any:
    return yaml.safe_load(text)


def _parse_toml(text: str) -> Any:
    return toml.loads(text)


PARSERS: dict[str, Callable[[str], Any]] = {
    "json": _parse_json,
    "yaml": _parse_yaml,
    "toml": _parse_toml,
}


def load_structured(path: Path) -> dict[str, Any]:
    """Read a mapping from ``path``, choosing the parser by file suffix."""
    format_type = SUPPORTED_FORMATS.get(path.suffix.lower())
    if format_type is None:
        raise ScenarioFileError(
            f"Unsupported configuration format '{path.suffix}' for {path}; "
            f"use one of {', '.join(sorted(SUPPORTED_FORMATS))}"
        )
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioFileError(f"Cannot read {path}: {e}") from e
    try:
        data = PARSERS[format_type](text)
    except Exception as e:
        raise ScenarioFileError(f"Failed to parse {format_type} file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ScenarioFileError(f"{path} must contain a mapping at the top level")
    logger.debug(f"Loaded {format_type} configuration from {path}")
    return data


def _validate[ModelT: (ScenarioFile, SweepFile)](
    model: type[ModelT], data: dict[str, Any], path: Path
) -> ModelT:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ScenarioFileError(f"{path} failed {model.__name__} validation:\n{e}") from e


def scenario_to_document(scenario: Scenario) -> dict[str, Any]:
    """Plain-data form of a scenario, ready for ``yaml.safe_dump``."""
    topology = scenario.topology
    intersections = []
    for node in sorted(topology.intersections):
        cfg = topology.intersections[node]
        intersections.append(
            IntersectionSpec(
                id=cfg.id,
                entry_roads=list(cfg.entry_roads),
                exit_roads=list(cfg.exit_roads),
                phases=[
                    PhaseSpec(
                        turns=[str(turn) for turn in sorted(phase.turns)],
                        g_min=phase.g_min,
                        g_max=phase.g_max,
                        intergreen=phase.intergreen,
                    )
                    for phase in cfg.phase_model
                ],
                turns=[
                    TurnSpec(entry=turn.entry, exit=turn.exit, probability=p)
                    for turn, p in cfg.turn_probabilities.items()
                ],
            )
        )
    demand = scenario.demand
    document = ScenarioFile(
        name=scenario.name,
        demand_levels=list(scenario.demand_levels),
        defaults=scenario.defaults,
        roads=[
            RoadSpec(
                id=road.id,
                length=road.length,
                lanes=road.lanes,
                from_node=road.from_node,
                to_node=road.to_node,
            )
            for _, road in sorted(topology.roads.items())
        ],
        intersections=intersections,
        demand=DemandSpec(
            total_demand=demand.total_demand,
            generation_duration=demand.generation_duration,
            profile=[
                ShareRowSpec(
                    start=t,
                    shares={rid: demand.share_at(rid, t) for rid in sorted(demand.entry_shares)},
                )
                for t in demand.breakpoints()
            ],
        ),
    )
    return document.model_dump(mode="json")


def scenario_from_document(document: ScenarioFile) -> Scenario:
    roads = {
        spec.id: Road(spec.id, spec.length, spec.lanes, spec.from_node, spec.to_node)
        for spec in document.roads
    }
    intersections = {}
    for spec in document.intersections:
        phases = tuple(
            Phase(
                turns=frozenset(TurnMovement(*turn.split("->", 1)) for turn in phase.turns),
                g_min=phase.g_min,
                g_max=phase.g_max,
                intergreen=phase.intergreen,
            )
            for phase in spec.phases
        )
        intersections[spec.id] = IntersectionConfig(
            id=spec.id,
            phase_model=PhaseModel(phases),
            turn_probabilities={
                TurnMovement(turn.entry, turn.exit): turn.probability for turn in spec.turns
            },
            entry_roads=tuple(spec.entry_roads),
            exit_roads=tuple(spec.exit_roads),
        )

    road_ids = sorted({rid for row in document.demand.profile for rid in row.shares})
    entry_shares = {
        rid: tuple((row.start, row.shares.get(rid, 0.0)) for row in document.demand.profile)
        for rid in road_ids
    }
    try:
        demand = DemandProfile(
            total_demand=document.demand.total_demand,
            entry_shares=entry_shares,
            generation_duration=document.demand.generation_duration,
        )
        return Scenario(
            name=document.name,
            topology=NetworkTopology(intersections=intersections, roads=roads),
            demand=demand,
            demand_levels=tuple(document.demand_levels),
            defaults=document.defaults,
        )
    except ValueError as e:
        raise ScenarioFileError(f"Scenario {document.name}: {e}") from e


def load_scenario_file(path: Path) -> Scenario:
    document = _validate(ScenarioFile, load_structured(path), path)
    scenario = scenario_from_document(document)
    unknown = sorted(set(scenario.demand.entry_shares) - set(scenario.topology.roads))
    if unknown:
        raise ScenarioFileError(f"{path}: demand references unknown roads {', '.join(unknown)}")
    return scenario


def resolve_scenario(name_or_path: str) -> Scenario:
    """A built-in scenario by name, otherwise a scenario file."""
    if name_or_path in BUILDERS:
        return build_scenario(name_or_path)
    path = Path(name_or_path)
    if path.suffix.lower() in SUPPORTED_FORMATS:
        return load_scenario_file(path)
    raise UnknownScenarioError(
        f"'{name_or_path}' is neither a built-in scenario ({', '.join(sorted(BUILDERS))}) "
        "nor a scenario file"
    )


def load_sweep_file(path: Path) -> SweepFile:
    return _validate(SweepFile, load_structured(path), path)


def dump_scenario_yaml(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_document(scenario), sort_keys=False)
