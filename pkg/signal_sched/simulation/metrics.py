"""Episode metrics and their CSV files.

``vehicles.csv`` holds one ``id,spawn,exit,delay`` row per vehicle in id order,
followed by a summary row ``summary,<vehicles_in>,<vehicles_out>,<mean_delay>``.
Wall-clock quantities go to ``planning.csv`` only.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from ..traffic.model import NodeId
from .controller import PlanningStats
from .signals import SignalState, TraceRow

VEHICLE_COLUMNS = ("id", "spawn", "exit", "delay")
PLANNING_COLUMNS = (
    "intersection",
    "solves",
    "optimal",
    "feasible",
    "infeasible",
    "forced_terminations",
    "nodes",
    "solve_time_total",
    "solve_time_mean",
    "solve_time_max",
    "warm_accepted",
    "warm_rejected",
    "plan_violations",
    "saa_mismatches",
    "warm_regressions",
)
TRACE_COLUMNS = ("time", "intersection", "phase", "state")


@dataclass(frozen=True)
class VehicleRecord:
    id: str
    spawn: float
    exit: float
    delay: float  # traversal time minus free-flow time


@dataclass(frozen=True)
class RunMetrics:
    vehicles: tuple[VehicleRecord, ...]
    vehicles_in: int
    vehicles_out: int
    end_time: float
    planning: Mapping[NodeId, PlanningStats] = field(default_factory=dict, hash=False)
    trace: tuple[TraceRow, ...] = ()

    @property
    def mean_delay(self) -> float:
        if not self.vehicles:
            return 0.0
        return math.fsum(v.delay for v in self.vehicles) / len(self.vehicles)

    @property
    def conserved(self) -> bool:
        return self.vehicles_in == self.vehicles_out

    def total(self, attribute: str) -> int:
        return sum(getattr(stats, attribute) for stats in self.planning.values())


def format_float(value: float) -> str:
    return f"{value:.6f}"


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to a temp file beside ``path`` and move it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        Path(tmp_name).replace(path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def csv_text(header: Iterable[str], rows: Iterable[Iterable[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def vehicle_csv(metrics: RunMetrics) -> str:
    rows: list[list[object]] = [
        [v.id, format_float(v.spawn), format_float(v.exit), format_float(v.delay)]
        for v in metrics.vehicles
    ]
    rows.append(
        ["summary", metrics.vehicles_in, metrics.vehicles_out, format_float(metrics.mean_delay)]
    )
    return csv_text(VEHICLE_COLUMNS, rows)


def write_vehicle_csv(metrics: RunMetrics, path: Path) -> None:
    atomic_write_text(path, vehicle_csv(metrics))


def write_planning_csv(metrics: RunMetrics, path: Path) -> None:
    rows = []
    for node in sorted(metrics.planning):
        stats = metrics.planning[node]
        row: list[object] = []
        for column in PLANNING_COLUMNS:
            value = getattr(stats, column)
            row.append(format_float(value) if isinstance(value, float) else value)
        rows.append(row)
    atomic_write_text(path, csv_text(PLANNING_COLUMNS, rows))


def write_trace_csv(trace: Iterable[TraceRow], path: Path) -> None:
    rows = ([format_float(r.time), r.intersection, r.phase, r.state.value] for r in trace)
    atomic_write_text(path, csv_text(TRACE_COLUMNS, rows))


def read_trace_csv(path: Path) -> list[TraceRow]:
    with path.open(encoding="utf-8", newline="") as handle:
        return [
            TraceRow(
                time=float(row["time"]),
                intersection=row["intersection"],
                phase=int(row["phase"]),
                state=SignalState(row["state"]),
            )
            for row in csv.DictReader(handle)
        ]
