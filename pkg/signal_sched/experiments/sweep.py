"""Experiment sweeps over controller variant, demand level, sample count and seed.

Output layout under ``out_dir``::

    cells.csv          one row per cell, in cell order
    summary.csv        aggregate of cells.csv
    metadata.yaml      scenario and sweep echo
    cells/<cell>/      vehicles.csv and planning.csv of every cell
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import asdict, dataclass, field, replace
from enum import StrEnum
from pathlib import Path
from typing import Any

import yaml
from loguru import logger

from .. import __version__
from ..processing.parallel_processor import ParallelCellRunner
from ..schemas import SweepFile
from ..simulation.controller import ControllerKind, ControllerParams, controller_label
from ..simulation.episode import DEFAULT_STALL_LIMIT, run_episode
from ..simulation.metrics import atomic_write_text, write_planning_csv, write_vehicle_csv
from ..simulation.routes import SimConfig, generate_routes
from .config_loader import resolve_scenario
from .report import (
    CellRow,
    CellStatus,
    SummaryRow,
    aggregate,
    cells_csv,
    read_cells_csv,
    summary_csv,
)
from .scenarios import Scenario


class GuidedSearchMode(StrEnum):
    OFF = "off"
    ON = "on"
    BOTH = "both"

    @property
    def flags(self) -> tuple[bool, ...]:
        return {
            GuidedSearchMode.OFF: (False,),
            GuidedSearchMode.ON: (True,),
            GuidedSearchMode.BOTH: (False, True),
        }[self]


@dataclass(frozen=True)
class SweepSpec:
    scenario: str
    controllers: tuple[ControllerKind, ...] = tuple(ControllerKind)
    sample_counts: tuple[int, ...] = (10,)  # ignored by the SUR variants
    guided_search: GuidedSearchMode = GuidedSearchMode.OFF
    seeds: tuple[int, ...] = tuple(range(20))
    solver_time_limit: float = 5.0
    levels: tuple[float, ...] = ()  # empty: the scenario's demand levels
    horizon_extensions: tuple[float, ...] = ()  # empty: the scenario default
    node_limit: int | None = 4000
    tick: float = 0.5
    generation_duration: float | None = None
    verify: bool = False
    stall_limit: float = DEFAULT_STALL_LIMIT
    defaults: Mapping[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        if not self.controllers:
            raise ValueError("Configuration Error: a sweep needs at least one controller")
        if not self.seeds:
            raise ValueError("Configuration Error: a sweep needs at least one seed")
        if any(count < 1 for count in self.sample_counts):
            raise ValueError("Configuration Error: sample counts must be at least 1")
        if any(kind.sample_based for kind in self.controllers) and not self.sample_counts:
            raise ValueError("Configuration Error: sample-based controllers need sample counts")
        if self.solver_time_limit <= 0:
            raise ValueError("Configuration Error: solver_time_limit must be positive")
        if any(ext <= 0 for ext in self.horizon_extensions):
            raise ValueError("Configuration Error: horizon extensions must be positive")

    @classmethod
    def from_file(cls, document: SweepFile, **fallbacks: Any) -> SweepSpec:
        """Spec from a sweep file; ``fallbacks`` fill the fields the file leaves unset."""
        values: dict[str, Any] = {
            "scenario": document.scenario,
            "controllers": tuple(ControllerKind(c) for c in document.controllers),
            "sample_counts": tuple(document.sample_counts),
            "guided_search": GuidedSearchMode(document.guided_search),
            "seeds": tuple(document.seeds),
            "verify": document.verify,
            "defaults": dict(document.defaults),
        }
        optional = {
            "levels": tuple(document.levels) if document.levels else None,
            "horizon_extensions": (
                tuple(document.horizon_extensions) if document.horizon_extensions else None
            ),
            "solver_time_limit": document.solver_time_limit,
            "node_limit": document.node_limit,
            "tick": document.tick,
            "generation_duration": document.generation_duration,
            "stall_limit": document.stall_limit,
        }
        for key, value in optional.items():
            if value is not None:
                values[key] = value
            elif fallbacks.get(key) is not None:
                values[key] = fallbacks[key]
        return cls(**values)

    def to_record(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "controllers": [kind.value for kind in self.controllers],
            "sample_counts": list(self.sample_counts),
            "guided_search": self.guided_search.value,
            "seeds": list(self.seeds),
            "solver_time_limit": self.solver_time_limit,
            "levels": list(self.levels),
            "horizon_extensions": list(self.horizon_extensions),
            "node_limit": self.node_limit,
            "tick": self.tick,
            "generation_duration": self.generation_duration,
            "verify": self.verify,
            "stall_limit": self.stall_limit,
            "defaults": dict(sorted(self.defaults.items())),
        }


@dataclass(frozen=True)
class SweepCell:
    controller: ControllerKind
    level: float
    sample_count: int
    guided_search: bool
    horizon_extension: float | None
    seed: int

    @property
    def label(self) -> str:
        return controller_label(self.controller, self.sample_count, self.guided_search)

    @property
    def key(self) -> tuple[float, float, str, int]:
        extension = -1.0 if self.horizon_extension is None else self.horizon_extension
        return (self.level, extension, self.label, self.seed)

    @property
    def dirname(self) -> str:
        name = f"{self.label}_L{self.level:g}"
        if self.horizon_extension is not None:
            name += f"_he{self.horizon_extension:g}"
        return f"{name}_s{self.seed}"

    def __str__(self) -> str:
        return self.dirname


def expand_cells(spec: SweepSpec, scenario: Scenario) -> list[SweepCell]:
    levels = spec.levels or scenario.demand_levels
    extensions = spec.horizon_extensions or (scenario.defaults.horizon_extension,)
    cells = {
        SweepCell(kind, level, count, guided, extension, seed)
        for kind in spec.controllers
        for guided in spec.guided_search.flags
        for count in (spec.sample_counts if kind.sample_based else (1,))
        for extension in (extensions if kind.coordinated else (None,))
        for level in levels
        for seed in spec.seeds
    }
    return sorted(cells, key=lambda cell: cell.key)


@dataclass(frozen=True)
class CellTask:
    scenario: Scenario
    cell: SweepCell
    params: ControllerParams
    sim_config: SimConfig
    stall_limit: float
    cell_dir: Path | None = None

    def __str__(self) -> str:
        return str(self.cell)


def _cell_row(cell: SweepCell, status: CellStatus, **values: Any) -> CellRow:
    return CellRow(
        controller=cell.controller.value,
        label=cell.label,
        level=cell.level,
        sample_count=cell.sample_count,
        guided_search=cell.guided_search,
        horizon_extension=cell.horizon_extension,
        seed=cell.seed,
        status=status,
        **values,
    )


def failed_row(task: CellTask, error: BaseException) -> CellRow:
    return _cell_row(task.cell, CellStatus.FAILED, error=f"{type(error).__name__}: {error}")


def run_cell(task: CellTask) -> CellRow:
    """Generate the routes of one (level, seed), run one episode and summarize it."""
    cell = task.cell
    scenario = task.scenario
    try:
        vehicles = generate_routes(
            scenario.topology,
            scenario.demand,
            scenario.turn_proportions,
            cell.level,
            cell.seed,
        )
        metrics = run_episode(
            scenario.topology,
            vehicles,
            cell.controller,
            task.params,
            task.sim_config,
            stall_limit=task.stall_limit,
        )
    except Exception as e:
        logger.warning(f"Cell {cell} failed: {e}")
        return failed_row(task, e)

    if task.cell_dir is not None:
        write_vehicle_csv(metrics, task.cell_dir / "vehicles.csv")
        write_planning_csv(metrics, task.cell_dir / "planning.csv")
    return _cell_row(
        cell,
        CellStatus.OK,
        vehicles_in=metrics.vehicles_in,
        vehicles_out=metrics.vehicles_out,
        mean_delay=metrics.mean_delay,
        solves=metrics.total("solves"),
        optimal=metrics.total("optimal"),
        feasible=metrics.total("feasible"),
        infeasible=metrics.total("infeasible"),
        forced_terminations=metrics.total("forced_terminations"),
        nodes=metrics.total("nodes"),
        plan_violations=metrics.total("plan_violations"),
        saa_mismatches=metrics.total("saa_mismatches"),
        warm_regressions=metrics.total("warm_regressions"),
    )


def build_tasks(
    spec: SweepSpec,
    scenario: Scenario,
    out_dir: Path | None,
    base_params: ControllerParams,
    sim_config: SimConfig,
) -> list[CellTask]:
    tasks = []
    for cell in expand_cells(spec, scenario):
        params = replace(
            base_params,
            sample_count=cell.sample_count,
            guided_search=cell.guided_search,
            time_limit=spec.solver_time_limit,
            node_limit=spec.node_limit,
            horizon_cycles=scenario.defaults.horizon_cycles,
            merge_threshold=scenario.defaults.merge_threshold,
            horizon_extension=(
                cell.horizon_extension
                if cell.horizon_extension is not None
                else scenario.defaults.horizon_extension
            ),
            verify=spec.verify,
        )
        tasks.append(
            CellTask(
                scenario=scenario,
                cell=cell,
                params=params,
                sim_config=replace(sim_config, tick=spec.tick, seed=cell.seed),
                stall_limit=spec.stall_limit,
                cell_dir=out_dir / "cells" / cell.dirname if out_dir is not None else None,
            )
        )
    return tasks


def prepare_scenario(spec: SweepSpec, scenario: Scenario | None = None) -> Scenario:
    scenario = scenario or resolve_scenario(spec.scenario)
    scenario = scenario.with_defaults(**spec.defaults)
    if spec.generation_duration is not None:
        scenario = scenario.with_generation_duration(spec.generation_duration)
    return scenario


def sweep_metadata(spec: SweepSpec, scenario: Scenario, sim_config: SimConfig) -> dict[str, Any]:
    topology = scenario.topology
    simulation = asdict(sim_config)
    simulation.pop("seed")
    simulation["tick"] = spec.tick
    return {
        "signal_sched_version": __version__,
        "scenario": {
            "name": scenario.name,
            "intersections": len(topology.intersections),
            "roads": len(topology.roads),
            "source_roads": topology.source_roads(),
            "demand_levels": list(scenario.demand_levels),
            "generation_duration": scenario.demand.generation_duration,
            "defaults": scenario.defaults.model_dump(),
        },
        "simulation": simulation,
        "sweep": spec.to_record(),
    }


def run_sweep(
    spec: SweepSpec,
    out_dir: Path,
    *,
    workers: int | None = None,
    scenario: Scenario | None = None,
    base_params: ControllerParams | None = None,
    sim_config: SimConfig | None = None,
) -> list[SummaryRow]:
    """Run every cell of ``spec`` and write cells, summary and metadata to ``out_dir``.

    A failing cell is recorded with status ``failed`` and the sweep goes on.
    """
    scenario = prepare_scenario(spec, scenario)
    base_params = base_params or ControllerParams()
    sim_config = sim_config or SimConfig(tick=spec.tick)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = build_tasks(spec, scenario, out_dir, base_params, sim_config)
    logger.info(f"Sweep over {scenario.name}: {len(tasks)} cell(s)")
    runner = ParallelCellRunner(run_cell, failed_row, max_workers=workers, desc="Sweep cells")
    rows = runner.run(tasks)

    cells_path = out_dir / "cells.csv"
    atomic_write_text(cells_path, cells_csv(rows))
    summary = aggregate(read_cells_csv(cells_path))
    atomic_write_text(out_dir / "summary.csv", summary_csv(summary))
    atomic_write_text(
        out_dir / "metadata.yaml",
        yaml.safe_dump(sweep_metadata(spec, scenario, sim_config), sort_keys=False),
    )

    failed = sum(1 for row in rows if not row.ok)
    if failed:
        logger.warning(f"{failed} of {len(rows)} cell(s) failed; see cells.csv")
    logger.success(f"Sweep finished: {len(rows) - failed}/{len(rows)} cell(s) in {out_dir}")
    return summary
