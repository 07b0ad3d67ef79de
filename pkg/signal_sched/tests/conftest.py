import os
import shutil
import sys
import tempfile
from collections.abc import Callable, Generator, Sequence
from pathlib import Path

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))

from signal_sched.experiments.scenarios import Scenario, build_isolated
from signal_sched.sampling.sampler import SampleSet
from signal_sched.scheduling.problem import ScheduleProblem
from signal_sched.traffic.model import (
    Cluster,
    InflowSample,
    InitialConditions,
    IntersectionConfig,
    NetworkTopology,
    Phase,
    PhaseModel,
    Road,
    TurnMovement,
)

ClusterSpec = tuple[float, float, float]  # (arrival, length, count)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Creates a temporary output directory and cleans up afterward."""
    path = tempfile.mkdtemp()
    yield Path(path)
    shutil.rmtree(path)


@pytest.fixture
def two_phase_model() -> PhaseModel:
    """Phase 0 serves a->c; phase 1 serves a->d and b->d."""
    return PhaseModel(
        phases=(
            Phase(frozenset({TurnMovement("a", "c")}), g_min=2, g_max=10, intergreen=1),
            Phase(
                frozenset({TurnMovement("a", "d"), TurnMovement("b", "d")}),
                g_min=2,
                g_max=10,
                intergreen=1,
            ),
        )
    )


@pytest.fixture
def simple_intersection(two_phase_model: PhaseModel) -> IntersectionConfig:
    return IntersectionConfig(
        id="X",
        phase_model=two_phase_model,
        turn_probabilities={
            TurnMovement("a", "c"): 0.7,
            TurnMovement("a", "d"): 0.3,
            TurnMovement("b", "d"): 1.0,
        },
        entry_roads=("a", "b"),
        exit_roads=("c", "d"),
    )


@pytest.fixture
def simple_topology(simple_intersection: IntersectionConfig) -> NetworkTopology:
    """One intersection X fed by a and b, draining into sinks c and d."""
    return NetworkTopology(
        intersections={"X": simple_intersection},
        roads={
            "a": Road("a", 100.0, 1, "P", "X"),
            "b": Road("b", 100.0, 1, "Q", "X"),
            "c": Road("c", 100.0, 1, "X", "R"),
            "d": Road("d", 100.0, 1, "X", "S"),
        },
    )


@pytest.fixture
def make_problem(
    two_phase_model: PhaseModel,
) -> Callable[..., ScheduleProblem]:
    """Builds two-phase problems from per-sample, per-phase cluster tuples."""

    def factory(
        samples: Sequence[Sequence[Sequence[ClusterSpec]]],
        now: int = 10,
        current_phase: int = 0,
        elapsed_green: int = 0,
        horizon_cycles: int = 1,
        phase_model: PhaseModel | None = None,
    ) -> ScheduleProblem:
        return ScheduleProblem(
            phase_model=phase_model or two_phase_model,
            initial=InitialConditions(current_phase, elapsed_green),
            now=now,
            horizon_cycles=horizon_cycles,
            samples=SampleSet(
                samples=tuple(
                    InflowSample(
                        per_phase=tuple(
                            tuple(
                                Cluster(count=count, arrival=arrival, length=length)
                                for arrival, length, count in clusters
                            )
                            for clusters in per_phase
                        )
                    )
                    for per_phase in samples
                )
            ),
        )

    return factory


@pytest.fixture
def isolated_scenario() -> Scenario:
    return build_isolated()


@pytest.fixture
def short_isolated(isolated_scenario: Scenario) -> Scenario:
    """The isolated intersection with one minute of demand."""
    return isolated_scenario.with_generation_duration(60.0)
