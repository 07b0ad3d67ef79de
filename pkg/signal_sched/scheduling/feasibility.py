"""Standalone checker for timing plans and cluster schedules."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import TYPE_CHECKING

from ..sampling.sampler import SampleSet
from ..traffic.model import (
    ClusterSchedule,
    Fragment,
    InitialConditions,
    PhaseModel,
    SignalTimingPlan,
)
from ..traffic.validation import Violation

if TYPE_CHECKING:
    from .problem import ScheduleProblem, Solution

SUM_TOLERANCE = 1e-9


def check_plan(
    plan: SignalTimingPlan,
    phase_model: PhaseModel,
    initial: InitialConditions,
    now: int,
) -> list[Violation]:
    """Green bounds, chaining with inter-green, and initial conditions."""
    found: list[Violation] = []
    count = len(phase_model)
    expected = plan.horizon_cycles * count
    if len(plan.intervals) != expected:
        return [
            Violation(
                "plan",
                "plan.size",
                f"{len(plan.intervals)} intervals for {plan.horizon_cycles} cycles of {count} phases",
            )
        ]

    for position, iv in enumerate(plan.intervals):
        entity = f"interval:{iv.phase}/{iv.cycle}"
        phase_index = (initial.current_phase + position) % count
        if iv.phase != phase_index or iv.cycle != position // count:
            found.append(
                Violation(
                    entity,
                    "plan.order",
                    f"position {position} must serve phase {phase_index} in cycle {position // count}",
                )
            )
            continue
        if not (isinstance(iv.start, int) and isinstance(iv.end, int)):
            found.append(Violation(entity, "plan.grid", "interval bounds must be integers"))
        phase = phase_model[phase_index]
        if not phase.g_min <= iv.length <= phase.g_max:
            found.append(
                Violation(
                    entity,
                    "plan.green_bounds",
                    f"green {iv.length} outside [{phase.g_min}, {phase.g_max}]",
                )
            )
        if position > 0:
            previous = plan.intervals[position - 1]
            gap = phase_model[previous.phase].intergreen
            if iv.start != previous.end + gap:
                rule = "plan.chaining" if previous.cycle == iv.cycle else "plan.cycle_chaining"
                found.append(
                    Violation(
                        entity,
                        rule,
                        f"starts at {iv.start}, expected {previous.end} + {gap}",
                    )
                )

    first = plan.intervals[0]
    if first.start != now - initial.elapsed_green:
        found.append(
            Violation(
                "interval:initial",
                "plan.initial_start",
                f"current phase starts at {first.start}, expected {now - initial.elapsed_green}",
            )
        )
    if first.end < now:
        found.append(
            Violation("interval:initial", "plan.initial_end", f"current phase ends at {first.end} < {now}")
        )
    return found


def check_schedule(
    plan: SignalTimingPlan, schedules: ClusterSchedule, samples: SampleSet
) -> list[Violation]:
    """Fragment sums, arrival, containment and FIFO for every sample."""
    found: list[Violation] = []
    grouped: dict[tuple[int, int, int], list[tuple[int, Fragment]]] = defaultdict(list)
    for (s, k, q, r), fragment in schedules.fragments.items():
        grouped[(s, k, q)].append((r, fragment))

    for s, sample in enumerate(samples.samples):
        for k, clusters in enumerate(sample.per_phase):
            previous_end = -math.inf
            previous_cycle = -1
            for q, cluster in enumerate(clusters):
                entity = f"cluster:{s}/{k}/{q}"
                pieces = sorted(grouped.pop((s, k, q), []), key=lambda item: item[0])
                if not pieces:
                    found.append(Violation(entity, "fragment.missing", "cluster has no fragments"))
                    continue
                total = math.fsum(f.length for _, f in pieces)
                if abs(total - cluster.length) > SUM_TOLERANCE:
                    found.append(
                        Violation(
                            entity,
                            "fragment.sum",
                            f"fragments sum to {total}, cluster length is {cluster.length}",
                        )
                    )
                for r, fragment in pieces:
                    found.extend(_check_fragment(entity, plan, k, r, fragment, cluster.arrival, cluster.length))
                first_start = pieces[0][1].start
                if first_start < previous_end - SUM_TOLERANCE:
                    found.append(
                        Violation(
                            entity,
                            "fragment.fifo",
                            f"starts at {first_start} before predecessor leaves at {previous_end}",
                        )
                    )
                if pieces[0][0] < previous_cycle:
                    found.append(
                        Violation(
                            entity,
                            "fragment.fifo_cycle",
                            f"cycle {pieces[0][0]} precedes predecessor cycle {previous_cycle}",
                        )
                    )
                last_cycle, last = pieces[-1]
                previous_end = last.start + last.length
                previous_cycle = last_cycle

    for (s, k, q) in sorted(grouped):
        found.append(
            Violation(f"cluster:{s}/{k}/{q}", "fragment.dangling", "fragment references no cluster")
        )
    return found


def _check_fragment(
    entity: str,
    plan: SignalTimingPlan,
    phase: int,
    cycle: int,
    fragment: Fragment,
    arrival: float,
    length: float,
) -> list[Violation]:
    found: list[Violation] = []
    if not min(1.0, length) - SUM_TOLERANCE <= fragment.length <= length + SUM_TOLERANCE:
        found.append(
            Violation(entity, "fragment.length", f"fragment length {fragment.length} outside [1, {length}]")
        )
    if fragment.start < arrival:
        found.append(
            Violation(entity, "fragment.arrival", f"starts at {fragment.start} before arrival {arrival}")
        )
    if cycle == plan.horizon_cycles:
        if fragment.start < plan.end:
            found.append(
                Violation(entity, "fragment.spill", f"spilled fragment starts inside the horizon at {fragment.start}")
            )
        return found
    try:
        window = plan.interval(phase, cycle)
    except KeyError:
        return [*found, Violation(entity, "fragment.containment", f"no interval for cycle {cycle}")]
    if fragment.start < window.start or fragment.start + fragment.length > window.end:
        found.append(
            Violation(
                entity,
                "fragment.containment",
                f"[{fragment.start}, {fragment.start + fragment.length}) outside "
                f"[{window.start}, {window.end}) of cycle {cycle}",
            )
        )
    return found


def check_solution(problem: ScheduleProblem, solution: Solution) -> list[Violation]:
    """All plan and schedule rules for a solved problem."""
    if solution.plan is None:
        return [Violation("solution", "solution.plan", "solution carries no plan")]
    return [
        *check_plan(solution.plan, problem.phase_model, problem.initial, problem.now),
        *check_schedule(solution.plan, solution.schedules, problem.samples),
    ]
