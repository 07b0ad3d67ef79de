"""Scheduling problem and solution records."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

from ..sampling.sampler import SampleSet
from ..traffic.model import (
    ClusterSchedule,
    InflowSample,
    InitialConditions,
    Interval,
    PhaseModel,
    SignalTimingPlan,
)


class SolveStatus(StrEnum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"  # time- or node-limited incumbent
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ScheduleProblem:
    """One intersection's cluster-scheduling problem at decision time ``now``."""

    phase_model: PhaseModel
    initial: InitialConditions
    now: int
    horizon_cycles: int
    samples: SampleSet

    def __post_init__(self) -> None:
        if isinstance(self.samples, InflowSample):
            object.__setattr__(self, "samples", SampleSet.single(self.samples))
        if self.horizon_cycles < 1:
            raise ValueError("horizon_cycles must be at least 1")
        if not self.samples.samples:
            raise ValueError("A schedule problem needs at least one sample")
        if not 0 <= self.initial.current_phase < len(self.phase_model):
            raise ValueError(f"Unknown current phase {self.initial.current_phase}")
        if self.initial.elapsed_green < 0:
            raise ValueError("elapsed_green must be non-negative")
        for sample in self.samples.samples:
            if len(sample.per_phase) != len(self.phase_model):
                raise ValueError("Every sample needs one cluster sequence per phase")
            for clusters in sample.per_phase:
                previous = None
                for cluster in clusters:
                    if cluster.arrival < self.now:
                        raise ValueError(
                            f"Cluster arrival {cluster.arrival} precedes decision time {self.now}"
                        )
                    if cluster.length <= 0 or cluster.count <= 0:
                        raise ValueError("Clusters need positive length and count")
                    if not (
                        float(cluster.arrival).is_integer() and float(cluster.length).is_integer()
                    ):
                        raise ValueError(
                            "Cluster arrival and length must lie on the 1 s grid; "
                            "cluster with resolution=1"
                        )
                    if previous is not None and cluster.arrival < previous:
                        raise ValueError("Cluster arrivals must be non-decreasing per phase")
                    previous = cluster.arrival

    @property
    def phase_count(self) -> int:
        return len(self.phase_model)

    @property
    def interval_count(self) -> int:
        return self.horizon_cycles * self.phase_count

    @property
    def origin(self) -> int:
        """Start of the current phase's green."""
        return self.now - self.initial.elapsed_green

    def interval_phase(self, position: int) -> int:
        return (self.initial.current_phase + position) % self.phase_count

    def length_bounds(self, position: int) -> tuple[int, int]:
        """Admissible green lengths of the interval at ``position`` in service order."""
        phase = self.phase_model[self.interval_phase(position)]
        if position == 0:
            return max(phase.g_min, self.initial.elapsed_green), phase.g_max
        return phase.g_min, phase.g_max

    @property
    def is_feasible(self) -> bool:
        low, high = self.length_bounds(0)
        return low <= high

    @property
    def spill_start(self) -> int:
        """Departure assigned to vehicle mass that no plan can serve in H cycles.

        This is the latest end any admissible plan can reach, so the penalty does
        not depend on the plan being evaluated.
        """
        total = self.origin
        for position in range(self.interval_count):
            phase = self.phase_model[self.interval_phase(position)]
            total += phase.g_max + phase.intergreen
        return total

    def plan_from_lengths(self, lengths: tuple[int, ...] | list[int]) -> SignalTimingPlan:
        """Chain green lengths into a plan starting at the current phase's onset."""
        intervals: list[Interval] = []
        start = self.origin
        for position, length in enumerate(lengths):
            phase_index = self.interval_phase(position)
            end = start + length
            intervals.append(
                Interval(
                    phase=phase_index,
                    cycle=position // self.phase_count,
                    start=start,
                    end=end,
                )
            )
            start = end + self.phase_model[phase_index].intergreen
        return SignalTimingPlan(
            intervals=tuple(intervals),
            horizon_cycles=self.horizon_cycles,
            decision_time=self.now,
        )


@dataclass(frozen=True)
class SolveStats:
    nodes: int = 0
    elapsed: float = 0.0  # wall-clock seconds
    warm_start_used: bool = False
    warm_start_objective: float | None = None


@dataclass(frozen=True)
class Solution:
    plan: SignalTimingPlan | None
    schedules: ClusterSchedule
    objective: float  # vehicle-seconds, averaged over samples
    status: SolveStatus
    stats: SolveStats = field(default_factory=SolveStats)
    diagnostics: str = ""
