"""Built-in scenarios, configuration files, sweeps and reports."""

from .config_loader import (
    dump_scenario_yaml,
    load_scenario_file,
    load_structured,
    load_sweep_file,
    resolve_scenario,
    scenario_from_document,
    scenario_to_document,
)
from .report import (
    CellRow,
    CellStatus,
    SummaryRow,
    aggregate,
    cells_csv,
    mean_std,
    read_cells_csv,
    summary_csv,
    summary_table,
)
from .scenarios import BUILDERS, Scenario, build_scenario
from .sweep import GuidedSearchMode, SweepCell, SweepSpec, expand_cells, run_cell, run_sweep

__all__ = [
    "BUILDERS",
    "CellRow",
    "CellStatus",
    "GuidedSearchMode",
    "Scenario",
    "SummaryRow",
    "SweepCell",
    "SweepSpec",
    "aggregate",
    "build_scenario",
    "cells_csv",
    "dump_scenario_yaml",
    "expand_cells",
    "load_scenario_file",
    "load_structured",
    "load_sweep_file",
    "mean_std",
    "read_cells_csv",
    "resolve_scenario",
    "run_cell",
    "run_sweep",
    "scenario_from_document",
    "scenario_to_document",
    "summary_csv",
    "summary_table",
]
