"""Greedy FIFO dispatch of clusters into a fixed plan, and delay evaluation."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from ..exceptions import DanglingFragmentError
from ..sampling.sampler import SampleSet
from ..traffic.model import (
    ClusterSchedule,
    Fragment,
    FragmentKey,
    InflowSample,
    SignalTimingPlan,
)
from .problem import ScheduleProblem

ClusterData = tuple[float, float, float]  # (arrival, length, count)
Window = tuple[float, float]  # [start, end)
DispatchRecord = tuple[int, int, float, float]  # (cluster, window, start, length)


def dispatch_phase(
    clusters: Sequence[ClusterData],
    windows: Sequence[Window],
    spill_start: float,
    record: list[DispatchRecord] | None = None,
) -> tuple[float, float]:
    """Dispatch one phase's clusters, in order, at their earliest feasible times.

    Returns the weighted delay and the completion time of the last cluster.
    Mass left over after the last window departs from ``spill_start`` onwards;
    its record uses window index ``len(windows)``.
    """
    delay = 0.0
    t = -math.inf
    w = 0
    n_windows = len(windows)
    spill_t = spill_start
    for q, (arrival, length, count) in enumerate(clusters):
        remaining = length
        if t < arrival:
            t = arrival
        weighted = 0.0
        while remaining > 0 and w < n_windows:
            w_start, w_end = windows[w]
            start = t if t > w_start else w_start
            if start >= w_end:
                w += 1
                continue
            piece = min(remaining, w_end - start)
            weighted += (start - arrival) * piece
            remaining -= piece
            t = start + piece
            if record is not None:
                record.append((q, w, start, piece))
        if remaining > 0:
            start = max(spill_t, t)
            weighted += (start - arrival) * remaining
            if record is not None:
                record.append((q, n_windows, start, remaining))
            spill_t = start + remaining
            t = spill_t
        delay += count * weighted / length
    return delay, t


def _cluster_data(sample: InflowSample) -> tuple[tuple[ClusterData, ...], ...]:
    return tuple(
        tuple((c.arrival, c.length, c.count) for c in clusters) for clusters in sample.per_phase
    )


def _plan_windows(plan: SignalTimingPlan, phase_count: int) -> list[list[Window]]:
    windows: list[list[Window]] = [[] for _ in range(phase_count)]
    for iv in plan.intervals:
        windows[iv.phase].append((iv.start, iv.end))
    return windows


def dispatch_given_plan(
    plan: SignalTimingPlan,
    sample: InflowSample,
    spill_start: float | None = None,
    sample_index: int = 0,
) -> tuple[ClusterSchedule, float]:
    """Schedule every cluster of ``sample`` into ``plan``; return fragments and delay.

    ``spill_start`` defaults to the end of the plan.
    """
    spill = plan.end if spill_start is None else spill_start
    windows = _plan_windows(plan, len(sample.per_phase))
    fragments: dict[FragmentKey, Fragment] = {}
    total = 0.0
    for phase, clusters in enumerate(_cluster_data(sample)):
        record: list[DispatchRecord] = []
        delay, _ = dispatch_phase(clusters, windows[phase], spill, record)
        total += delay
        for q, cycle, start, length in record:
            fragments[(sample_index, phase, q, cycle)] = Fragment(start, length)
    return ClusterSchedule(fragments=fragments), total


def evaluate_solution(
    plan: SignalTimingPlan, schedules: ClusterSchedule, samples: SampleSet
) -> float:
    """Mean over samples of the weighted waiting time implied by ``schedules``."""
    total = 0.0
    for (s, k, q, r), fragment in schedules.fragments.items():
        try:
            cluster = samples.samples[s].per_phase[k][q]
        except IndexError:
            raise DanglingFragmentError(
                f"Fragment ({s}, {k}, {q}, {r}) references no cluster"
            ) from None
        if not 0 <= r <= plan.horizon_cycles:
            raise DanglingFragmentError(f"Fragment ({s}, {k}, {q}, {r}) is outside the horizon")
        total += (fragment.start - cluster.arrival) * cluster.count * (
            fragment.length / cluster.length
        )
    return total / len(samples)


@dataclass(frozen=True)
class UniqueSample:
    """Samples with identical scheduling data, merged with their combined weight."""

    clusters: tuple[tuple[ClusterData, ...], ...]
    weight: float  # multiplicity / |Ξ|
    members: tuple[int, ...]


def collapse_samples(samples: SampleSet) -> list[UniqueSample]:
    groups: dict[tuple[tuple[ClusterData, ...], ...], list[int]] = {}
    for index, sample in enumerate(samples.samples):
        groups.setdefault(_cluster_data(sample), []).append(index)
    size = len(samples)
    return [
        UniqueSample(clusters=key, weight=len(members) / size, members=tuple(members))
        for key, members in groups.items()
    ]


class PlanEvaluator:
    """Objective and schedule evaluation of candidate plans for one problem."""

    def __init__(self, problem: ScheduleProblem):
        self.problem = problem
        self.phase_count = problem.phase_count
        self.interval_count = problem.interval_count
        self.unique = collapse_samples(problem.samples)
        self.spill_start = problem.spill_start
        self.origin = problem.origin
        self.phases = [problem.interval_phase(j) for j in range(self.interval_count)]
        self.bounds = [problem.length_bounds(j) for j in range(self.interval_count)]
        self.intergreen = [problem.phase_model[k].intergreen for k in self.phases]
        self.jobs: list[list[tuple[float, tuple[ClusterData, ...]]]] = [
            [(u.weight, u.clusters[k]) for u in self.unique if u.clusters[k]]
            for k in range(self.phase_count)
        ]

    @property
    def has_demand(self) -> bool:
        return any(self.jobs)

    def windows_for(self, lengths: Sequence[int]) -> list[list[Window]]:
        windows: list[list[Window]] = [[] for _ in range(self.phase_count)]
        start = self.origin
        for position, length in enumerate(lengths):
            end = start + length
            windows[self.phases[position]].append((start, end))
            start = end + self.intergreen[position]
        return windows

    def objective_for_windows(self, phase_windows: Sequence[Sequence[Window]]) -> float:
        total = 0.0
        for k in range(self.phase_count):
            windows = phase_windows[k]
            for weight, clusters in self.jobs[k]:
                delay, _ = dispatch_phase(clusters, windows, self.spill_start)
                total += weight * delay
        return total

    def objective(self, lengths: Sequence[int]) -> float:
        return self.objective_for_windows(self.windows_for(lengths))

    def completion_times(
        self, phase: int, windows: Sequence[Window]
    ) -> list[float]:
        """Per-cluster completion times of ``phase`` in every unique sample."""
        times: list[float] = []
        for _, clusters in self.jobs[phase]:
            record: list[DispatchRecord] = []
            dispatch_phase(clusters, windows, self.spill_start, record)
            finish: dict[int, float] = {}
            for q, _, start, length in record:
                finish[q] = start + length
            times.extend(finish.values())
        return times

    def schedules(self, lengths: Sequence[int]) -> ClusterSchedule:
        windows = self.windows_for(lengths)
        fragments: dict[FragmentKey, Fragment] = {}
        for unique in self.unique:
            for k, clusters in enumerate(unique.clusters):
                if not clusters:
                    continue
                record: list[DispatchRecord] = []
                dispatch_phase(clusters, windows[k], self.spill_start, record)
                for q, cycle, start, length in record:
                    for member in unique.members:
                        fragments[(member, k, q, cycle)] = Fragment(start, length)
        return ClusterSchedule(fragments=fragments)
