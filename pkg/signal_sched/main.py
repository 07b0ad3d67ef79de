import sys
from dataclasses import replace
from pathlib import Path
from typing import NoReturn

import typer
from loguru import logger
from rich.console import Console
from rich.table import Table

from .config import settings
from .exceptions import SignalSchedError, SimulationStalledError
from .experiments.config_loader import dump_scenario_yaml, load_sweep_file, resolve_scenario
from .experiments.report import summary_table
from .experiments.scenarios import BUILDERS, Scenario
from .experiments.sweep import GuidedSearchMode, SweepSpec, run_sweep
from .simulation.controller import ControllerKind, controller_label
from .simulation.episode import run_episode
from .simulation.metrics import (
    RunMetrics,
    write_planning_csv,
    write_trace_csv,
    write_vehicle_csv,
)
from .simulation.routes import generate_routes
from .simulation.signals import check_signal_trace
from .traffic.validation import validate_network

app = typer.Typer(
    name="signal-sched",
    help="Schedule-driven traffic signal control testbed: sample-based and "
    "expected-inflow controllers on simulated isolated, arterial and grid networks.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console(width=None, force_terminal=True)


def _configure_logging(out_dir: Path | None) -> None:
    logger.remove()
    logger.add(
        sys.stderr,
        level=settings.LOG_LEVEL,
        format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {message}",
    )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        logger.add(
            out_dir / "run.log",
            level=settings.RUN_LOG_LEVEL,
            format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{line} | {message}",
            enqueue=True,
        )


def _fail(message: str, error: Exception) -> NoReturn:
    console.print(f"[bold red]{message}: {error}[/bold red]")
    if isinstance(error, SimulationStalledError):
        for key, value in error.diagnostics.items():
            console.print(f"[red]  {key}: {value}[/red]")
    logger.error(f"{message}: {error}")
    raise typer.Exit(1) from error


def load_run_scenario(scenario_ref: str, generation_duration: float | None) -> Scenario:
    """Resolve a scenario; an explicit generation duration replaces its own."""
    loaded = resolve_scenario(scenario_ref)
    if generation_duration is None:
        return loaded
    return loaded.with_generation_duration(generation_duration)


def _result_table(metrics: RunMetrics, title: str) -> Table:
    table = Table(title=f"[bold green]{title}[/bold green]")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="magenta")
    table.add_row("Vehicles in / out", f"{metrics.vehicles_in} / {metrics.vehicles_out}")
    table.add_row("Mean delay (s)", f"{metrics.mean_delay:.3f}")
    table.add_row("Episode end (s)", f"{metrics.end_time:g}")
    table.add_row("Solves", str(metrics.total("solves")))
    table.add_row("Nodes explored", str(metrics.total("nodes")))
    table.add_row("Forced terminations", str(metrics.total("forced_terminations")))
    table.add_row("Warm starts accepted / rejected", f"{metrics.total('warm_accepted')} / {metrics.total('warm_rejected')}")
    table.add_row("Plan violations", str(metrics.total("plan_violations")))
    table.add_row("SAA mismatches", str(metrics.total("saa_mismatches")))
    table.add_row("Warm-start regressions", str(metrics.total("warm_regressions")))
    return table


@app.command()
def scenario(
    name: str = typer.Argument(..., help=f"Built-in scenario: {', '.join(sorted(BUILDERS))}"),
    output: Path | None = typer.Option(
        None, "-o", "--output", help="Write the scenario file here instead of stdout"
    ),
) -> None:
    """Emit a built-in scenario as a YAML scenario file."""
    try:
        text = dump_scenario_yaml(resolve_scenario(name))
    except (SignalSchedError, ValueError) as e:
        _fail("Scenario Error", e)
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
    console.print(f"[bold green]Scenario written to {output}[/bold green]")


@app.command()
def validate(
    scenario_ref: str = typer.Argument(..., metavar="SCENARIO", help="Scenario name or file"),
) -> None:
    """Load a scenario and report every network rule it violates."""
    try:
        loaded = resolve_scenario(scenario_ref)
    except (SignalSchedError, ValueError) as e:
        _fail("Scenario Error", e)
    violations = validate_network(loaded.topology)
    if not violations:
        console.print(
            f"[bold green]{loaded.name}: {len(loaded.topology.intersections)} intersection(s), "
            "no violations.[/bold green]"
        )
        return
    table = Table(title=f"[bold red]{loaded.name}: {len(violations)} violation(s)[/bold red]")
    table.add_column("Entity", style="cyan")
    table.add_column("Rule", style="magenta")
    table.add_column("Message")
    for violation in violations:
        table.add_row(violation.entity, violation.rule, violation.message)
    console.print(table)
    raise typer.Exit(1)


@app.command()
def run(
    scenario_ref: str = typer.Option("isolated", "--scenario", help="Scenario name or file"),
    controller: ControllerKind = typer.Option(ControllerKind.UTUS, "--controller"),
    level: float | None = typer.Option(
        None, "--level", help="Demand level in vph (default: the scenario's first level)"
    ),
    samples: int = typer.Option(settings.SAMPLE_COUNT, "--samples", help="Turn samples per decision"),
    seed: int = typer.Option(0, "--seed", "--seeds", help="Route and sampling seed"),
    guided_search: bool = typer.Option(False, "--guided-search", help="Warm-start from the shifted previous plan"),
    time_limit: float = typer.Option(settings.SOLVER_TIME_LIMIT, "--time-limit", help="Seconds per solve"),
    node_limit: int | None = typer.Option(
        settings.SOLVER_NODE_LIMIT, "--node-limit", help="Search nodes per solve; 0 for no limit"
    ),
    tick: float = typer.Option(settings.SIM_TICK, "--tick", help="Simulation tick in seconds"),
    generation_duration: float | None = typer.Option(
        settings.GENERATION_DURATION,
        "--generation-duration",
        help="Seconds of demand to generate (default: the scenario's own)",
    ),
    horizon_extension: float | None = typer.Option(
        None, "--horizon-extension", help="Seconds of non-local arrivals admitted"
    ),
    verify: bool = typer.Option(False, "--verify", help="Check every plan and the SAA identity"),
    trace: bool = typer.Option(False, "--trace", help="Write the per-tick signal trace"),
    message_log: bool = typer.Option(False, "--message-log", help="Write outflow messages as JSONL"),
    out: Path = typer.Option(Path(settings.OUTPUT_DIR), "--out", help="Output directory"),
) -> None:
    """Run a single episode and write its vehicle and planning CSVs."""
    _configure_logging(out)
    try:
        settings.validate_for_usage()
        loaded = load_run_scenario(scenario_ref, generation_duration)
        demand_level = level if level is not None else loaded.demand_levels[0]
        params = settings.controller_params(
            sample_count=samples,
            guided_search=guided_search,
            time_limit=time_limit,
            horizon_cycles=loaded.defaults.horizon_cycles,
            merge_threshold=loaded.defaults.merge_threshold,
            horizon_extension=(
                loaded.defaults.horizon_extension if horizon_extension is None else horizon_extension
            ),
            verify=verify,
        )
        params = replace(params, node_limit=node_limit if node_limit else None)
        sim_config = settings.sim_config(seed=seed, tick=tick)
    except (SignalSchedError, ValueError) as e:
        _fail("Configuration Error", e)

    label = controller_label(controller, samples, guided_search)
    table = Table(title="[bold green]signal-sched episode[/bold green]")
    table.add_column("Configuration", style="cyan")
    table.add_column("Value", style="magenta")
    table.add_row("Scenario", loaded.name)
    table.add_row("Controller", label)
    table.add_row("Demand level (vph)", f"{demand_level:g}")
    table.add_row("Seed", str(seed))
    table.add_row("Solver limits", f"{params.time_limit:g}s / {params.node_limit or 'no'} nodes")
    table.add_row("Horizon", f"{params.horizon_cycles} cycles, +{params.horizon_extension:g}s extension")
    table.add_row("Tick (s)", f"{sim_config.tick:g}")
    table.add_row("Output", str(out))
    console.print(table)

    try:
        vehicles = generate_routes(
            loaded.topology, loaded.demand, loaded.turn_proportions, demand_level, seed
        )
        metrics = run_episode(
            loaded.topology,
            vehicles,
            controller,
            params,
            sim_config,
            stall_limit=settings.STALL_LIMIT,
            trace=trace,
            message_log=out / "messages.jsonl" if message_log and controller.coordinated else None,
        )
    except (SignalSchedError, ValueError) as e:
        _fail("Episode Error", e)

    write_vehicle_csv(metrics, out / "vehicles.csv")
    write_planning_csv(metrics, out / "planning.csv")
    if trace:
        write_trace_csv(metrics.trace, out / "trace.csv")
    console.print(_result_table(metrics, f"{label} on {loaded.name} at {demand_level:g} vph"))

    if trace:
        violations = check_signal_trace(metrics.trace, loaded.topology, sim_config.tick)
        if violations:
            for violation in violations[:20]:
                console.print(f"[bold red]{violation}[/bold red]")
            raise typer.Exit(1)
        console.print("[bold green]Signal trace satisfies every timing rule.[/bold green]")
    if verify and metrics.total("plan_violations") + metrics.total("saa_mismatches"):
        console.print("[bold red]Verification found plan violations or SAA mismatches.[/bold red]")
        raise typer.Exit(1)


@app.command()
def sweep(
    scenario_ref: str = typer.Option("isolated", "--scenario", help="Scenario name or file"),
    config: Path | None = typer.Option(
        None, "--config", help="Sweep file (YAML, TOML or JSON); command-line axes are ignored"
    ),
    controllers: list[ControllerKind] = typer.Option(
        list(ControllerKind), "--controller", help="Controller variant; repeat for several"
    ),
    levels: list[float] = typer.Option([], "--level", help="Demand level in vph; repeat for several"),
    samples: list[int] = typer.Option([settings.SAMPLE_COUNT], "--samples", help="Sample count; repeat for several"),
    seeds: int = typer.Option(20, "--seeds", help="Number of seeds, numbered from 0"),
    guided_search: GuidedSearchMode = typer.Option(GuidedSearchMode.OFF, "--guided-search"),
    time_limit: float = typer.Option(settings.SOLVER_TIME_LIMIT, "--time-limit", help="Seconds per solve"),
    node_limit: int | None = typer.Option(
        settings.SOLVER_NODE_LIMIT, "--node-limit", help="Search nodes per solve; 0 for no limit"
    ),
    tick: float = typer.Option(settings.SIM_TICK, "--tick", help="Simulation tick in seconds"),
    generation_duration: float | None = typer.Option(
        settings.GENERATION_DURATION,
        "--generation-duration",
        help="Seconds of demand to generate (default: the sweep file's, else the scenario's)",
    ),
    horizon_extensions: list[float] = typer.Option(
        [], "--horizon-extension", help="Horizon extension in seconds; repeat for several"
    ),
    verify: bool = typer.Option(False, "--verify", help="Check every plan and the SAA identity"),
    workers: int = typer.Option(settings.SWEEP_WORKERS, "--workers", help="Worker processes; 0 for 80% of the CPUs"),
    out: Path = typer.Option(Path(settings.OUTPUT_DIR), "--out", help="Output directory"),
) -> None:
    """Run the full controller x level x sample-count x seed matrix."""
    _configure_logging(out)
    limit = node_limit if node_limit else None
    try:
        settings.validate_for_usage()
        if config is not None:
            spec = SweepSpec.from_file(
                load_sweep_file(config),
                solver_time_limit=time_limit,
                node_limit=limit,
                tick=tick,
                generation_duration=generation_duration,
                stall_limit=settings.STALL_LIMIT,
            )
        else:
            spec = SweepSpec(
                scenario=scenario_ref,
                controllers=tuple(controllers),
                sample_counts=tuple(samples),
                guided_search=guided_search,
                seeds=tuple(range(seeds)),
                solver_time_limit=time_limit,
                levels=tuple(levels),
                horizon_extensions=tuple(horizon_extensions),
                node_limit=limit,
                tick=tick,
                generation_duration=generation_duration,
                verify=verify,
                stall_limit=settings.STALL_LIMIT,
            )
    except (SignalSchedError, ValueError) as e:
        _fail("Configuration Error", e)

    table = Table(title="[bold green]signal-sched sweep[/bold green]")
    table.add_column("Configuration", style="cyan")
    table.add_column("Value", style="magenta")
    for key, value in spec.to_record().items():
        table.add_row(key, str(value))
    table.add_row("workers", str(workers or "auto"))
    table.add_row("output", str(out))
    console.print(table)

    try:
        summary = run_sweep(
            spec,
            out,
            workers=workers or None,
            base_params=settings.controller_params(),
            sim_config=settings.sim_config(tick=spec.tick),
        )
    except (SignalSchedError, ValueError, OSError) as e:
        _fail("Sweep Error", e)
    console.print(summary_table(summary, title=f"Sweep summary ({out / 'summary.csv'})"))


if __name__ == "__main__":
    app()
