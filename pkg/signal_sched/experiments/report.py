"""Cell records, the summary aggregator and their CSV and console forms.

The summary is computed only from what ``cells.csv`` holds, so re-running
:func:`aggregate` on a parsed ``cells.csv`` reproduces ``summary.csv`` exactly.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import astuple, dataclass, fields
from enum import StrEnum
from pathlib import Path

import numpy as np
from rich.table import Table

from ..simulation.controller import ControllerKind, controller_label
from ..simulation.metrics import csv_text, format_float

USUR_LABEL = ControllerKind.USUR.value


class CellStatus(StrEnum):
    OK = "ok"
    PARTIAL = "partial"
    FAILED = "failed"


@dataclass(frozen=True)
class CellRow:
    controller: str
    label: str
    level: float
    sample_count: int
    guided_search: bool
    horizon_extension: float | None  # None for uncoordinated controllers
    seed: int
    status: str
    vehicles_in: int = 0
    vehicles_out: int = 0
    mean_delay: float = math.nan
    solves: int = 0
    optimal: int = 0
    feasible: int = 0
    infeasible: int = 0
    forced_terminations: int = 0
    nodes: int = 0
    plan_violations: int = 0
    saa_mismatches: int = 0
    warm_regressions: int = 0
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == CellStatus.OK

    @property
    def group(self) -> tuple[str, float, float | None]:
        return (self.label, self.level, self.horizon_extension)


CELL_COLUMNS = tuple(f.name for f in fields(CellRow))


@dataclass(frozen=True)
class SummaryRow:
    label: str
    controller: str
    level: float
    horizon_extension: float | None
    seeds_ok: int
    seeds_failed: int
    mean_delay: float
    std_delay: float
    baseline: str
    pct_vs_baseline_mean: float
    pct_vs_baseline_std: float
    pct_vs_usur_mean: float
    pct_vs_usur_std: float

    @property
    def status(self) -> CellStatus:
        if self.seeds_failed == 0:
            return CellStatus.OK
        return CellStatus.PARTIAL if self.seeds_ok else CellStatus.FAILED


SUMMARY_COLUMNS = (
    "label",
    "controller",
    "level",
    "horizon_extension",
    "status",
    "seeds_ok",
    "seeds_failed",
    "mean_delay",
    "std_delay",
    "baseline",
    "pct_vs_baseline_mean",
    "pct_vs_baseline_std",
    "pct_vs_usur_mean",
    "pct_vs_usur_std",
)


def _num(value: float) -> str:
    return "" if math.isnan(value) else format_float(value)


def _opt(value: float | None) -> str:
    return "" if value is None else f"{value:g}"


def cells_csv(rows: Iterable[CellRow]) -> str:
    out = []
    for row in rows:
        values: list[object] = []
        for column, value in zip(CELL_COLUMNS, astuple(row), strict=True):
            match column:
                case "level":
                    values.append(f"{value:g}")
                case "horizon_extension":
                    values.append(_opt(value))
                case "mean_delay":
                    values.append(_num(value))
                case "guided_search":
                    values.append("true" if value else "false")
                case _:
                    values.append(value)
        out.append(values)
    return csv_text(CELL_COLUMNS, out)


def read_cells_csv(path: Path) -> list[CellRow]:
    rows = []
    with path.open(encoding="utf-8", newline="") as handle:
        for record in csv.DictReader(handle):
            rows.append(
                CellRow(
                    controller=record["controller"],
                    label=record["label"],
                    level=float(record["level"]),
                    sample_count=int(record["sample_count"]),
                    guided_search=record["guided_search"] == "true",
                    horizon_extension=(
                        float(record["horizon_extension"]) if record["horizon_extension"] else None
                    ),
                    seed=int(record["seed"]),
                    status=record["status"],
                    vehicles_in=int(record["vehicles_in"]),
                    vehicles_out=int(record["vehicles_out"]),
                    mean_delay=float(record["mean_delay"]) if record["mean_delay"] else math.nan,
                    solves=int(record["solves"]),
                    optimal=int(record["optimal"]),
                    feasible=int(record["feasible"]),
                    infeasible=int(record["infeasible"]),
                    forced_terminations=int(record["forced_terminations"]),
                    nodes=int(record["nodes"]),
                    plan_violations=int(record["plan_violations"]),
                    saa_mismatches=int(record["saa_mismatches"]),
                    warm_regressions=int(record["warm_regressions"]),
                    error=record["error"],
                )
            )
    return rows


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation; NaN where undefined."""
    if not values:
        return math.nan, math.nan
    data = np.asarray(values, dtype=float)
    std = float(np.std(data, ddof=1)) if len(data) > 1 else math.nan
    return float(np.mean(data)), std


def baseline_label(controller: str, label: str) -> str:
    """Label of the expected-inflow variant a controller is compared with."""
    base = controller_label(ControllerKind(controller).baseline, 1, False)
    return "" if base == label else base


def _pct_change(
    cells: Sequence[CellRow],
    reference: dict[int, CellRow],
) -> tuple[float, float]:
    changes = []
    for cell in cells:
        base = reference.get(cell.seed)
        if cell.ok and base is not None and base.ok and base.mean_delay > 0:
            changes.append(100.0 * (cell.mean_delay - base.mean_delay) / base.mean_delay)
    return mean_std(changes)


def aggregate(rows: Iterable[CellRow]) -> list[SummaryRow]:
    """Per (variant, level, horizon extension): delay statistics over seeds and
    the per-seed percentage change against the matching baseline and USUR."""
    groups: dict[tuple[str, float, float | None], list[CellRow]] = defaultdict(list)
    for row in rows:
        groups[row.group].append(row)

    def by_seed(label: str, level: float, extension: float | None) -> dict[int, CellRow]:
        return {cell.seed: cell for cell in groups.get((label, level, extension), [])}

    summary = []
    for key in sorted(groups, key=lambda k: (k[1], -1.0 if k[2] is None else k[2], k[0])):
        label, level, extension = key
        cells = sorted(groups[key], key=lambda c: c.seed)
        controller = cells[0].controller
        delays = [c.mean_delay for c in cells if c.ok]
        mean_delay, std_delay = mean_std(delays)

        base = baseline_label(controller, label)
        base_extension = extension if ControllerKind(controller).coordinated else None
        vs_base = (
            _pct_change(cells, by_seed(base, level, base_extension))
            if base
            else (math.nan, math.nan)
        )
        vs_usur = (
            _pct_change(cells, by_seed(USUR_LABEL, level, None))
            if label != USUR_LABEL
            else (math.nan, math.nan)
        )
        summary.append(
            SummaryRow(
                label=label,
                controller=controller,
                level=level,
                horizon_extension=extension,
                seeds_ok=len(delays),
                seeds_failed=len(cells) - len(delays),
                mean_delay=mean_delay,
                std_delay=std_delay,
                baseline=base,
                pct_vs_baseline_mean=vs_base[0],
                pct_vs_baseline_std=vs_base[1],
                pct_vs_usur_mean=vs_usur[0],
                pct_vs_usur_std=vs_usur[1],
            )
        )
    return summary


def summary_csv(rows: Iterable[SummaryRow]) -> str:
    out = [
        [
            row.label,
            row.controller,
            f"{row.level:g}",
            _opt(row.horizon_extension),
            row.status,
            row.seeds_ok,
            row.seeds_failed,
            _num(row.mean_delay),
            _num(row.std_delay),
            row.baseline,
            _num(row.pct_vs_baseline_mean),
            _num(row.pct_vs_baseline_std),
            _num(row.pct_vs_usur_mean),
            _num(row.pct_vs_usur_std),
        ]
        for row in rows
    ]
    return csv_text(SUMMARY_COLUMNS, out)


def _pm(mean: float, std: float) -> str:
    if math.isnan(mean):
        return "-"
    if math.isnan(std):
        return f"{mean:+.2f}"
    return f"{mean:+.2f} ± {std:.2f}"


def summary_table(rows: Sequence[SummaryRow], title: str = "Sweep summary") -> Table:
    table = Table(title=f"[bold green]{title}[/bold green]")
    table.add_column("Variant", style="cyan")
    table.add_column("Level (vph)", justify="right")
    table.add_column("Horizon ext. (s)", justify="right")
    table.add_column("Seeds", justify="right")
    table.add_column("Mean delay (s)", justify="right", style="magenta")
    table.add_column("% vs SUR baseline", justify="right")
    table.add_column("% vs USUR", justify="right")
    for row in rows:
        seeds = str(row.seeds_ok)
        if row.seeds_failed:
            seeds += f" [bold red]({row.seeds_failed} failed)[/bold red]"
        delay = "-" if math.isnan(row.mean_delay) else f"{row.mean_delay:.2f}"
        if not math.isnan(row.std_delay):
            delay += f" ± {row.std_delay:.2f}"
        table.add_row(
            row.label,
            f"{row.level:g}",
            _opt(row.horizon_extension) or "-",
            seeds,
            delay,
            _pm(row.pct_vs_baseline_mean, row.pct_vs_baseline_std),
            _pm(row.pct_vs_usur_mean, row.pct_vs_usur_std),
        )
    return table
