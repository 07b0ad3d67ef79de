"""Anytime branch-and-bound over green interval lengths."""

from __future__ import annotations

import math
import time
from collections.abc import Sequence

from loguru import logger

from ..traffic.model import ClusterSchedule, SignalTimingPlan
from .dispatch import PlanEvaluator
from .feasibility import check_plan
from .problem import ScheduleProblem, Solution, SolveStats, SolveStatus


class _SearchLimitReached(Exception):
    pass


class BranchAndBoundSolver:
    """Depth-first search over interval lengths in service order.

    Each node fixes the green length of the next interval. The lower bound
    dispatches every phase into relaxed windows: fixed intervals keep their exact
    windows, and each open interval becomes the union of every position it could
    take given the bounds of the open lengths before it. Ties on the objective go
    to the lexicographically smallest length vector, which is the plan that ends
    the current phase earliest.
    """

    def __init__(
        self,
        problem: ScheduleProblem,
        time_limit: float,
        node_limit: int | None = None,
    ):
        if time_limit <= 0:
            raise ValueError("time_limit must be positive")
        self.problem = problem
        self.time_limit = time_limit
        self.node_limit = node_limit
        self.evaluator = PlanEvaluator(problem)
        self.best_lengths: tuple[int, ...] = ()
        self.best_objective = math.inf
        self.nodes = 0
        self._deadline = 0.0

    def solve(self, warm_start: SignalTimingPlan | None = None) -> Solution:
        started = time.monotonic()
        self._deadline = started + self.time_limit
        problem = self.problem
        ev = self.evaluator

        if not problem.is_feasible:
            low, high = problem.length_bounds(0)
            return Solution(
                plan=None,
                schedules=ClusterSchedule(fragments={}),
                objective=math.inf,
                status=SolveStatus.INFEASIBLE,
                diagnostics=(
                    f"elapsed green {problem.initial.elapsed_green} exceeds the maximum "
                    f"green {high} of phase {problem.initial.current_phase} (needs >= {low})"
                ),
            )

        minimal = tuple(low for low, _ in ev.bounds)
        self._offer(minimal, ev.objective(minimal))

        warm_used = False
        warm_objective: float | None = None
        if warm_start is not None:
            warm_lengths = self._admissible_lengths(warm_start)
            if warm_lengths is None:
                logger.debug("Warm start rejected: incompatible with the current problem")
            else:
                warm_used = True
                warm_objective = ev.objective(warm_lengths)
                self._offer(warm_lengths, warm_objective)

        complete = True
        if ev.has_demand:
            try:
                self._branch([], problem.origin)
            except _SearchLimitReached:
                complete = False

        plan = problem.plan_from_lengths(self.best_lengths)
        elapsed = time.monotonic() - started
        status = SolveStatus.OPTIMAL if complete else SolveStatus.FEASIBLE
        logger.debug(
            f"Solved at t={problem.now}: status={status.value} objective={self.best_objective:.3f} "
            f"nodes={self.nodes} elapsed={elapsed:.3f}s"
        )
        return Solution(
            plan=plan,
            schedules=ev.schedules(self.best_lengths),
            objective=self.best_objective,
            status=status,
            stats=SolveStats(
                nodes=self.nodes,
                elapsed=elapsed,
                warm_start_used=warm_used,
                warm_start_objective=warm_objective,
            ),
        )

    def _offer(self, lengths: tuple[int, ...], objective: float) -> None:
        if objective < self.best_objective or (
            objective == self.best_objective and lengths < self.best_lengths
        ):
            self.best_objective = objective
            self.best_lengths = lengths

    def _admissible_lengths(self, plan: SignalTimingPlan) -> tuple[int, ...] | None:
        problem = self.problem
        if check_plan(plan, problem.phase_model, problem.initial, problem.now):
            return None
        return plan.lengths

    def _tick(self) -> None:
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise _SearchLimitReached
        if time.monotonic() > self._deadline:
            raise _SearchLimitReached

    def _branch(self, prefix: list[int], start: int) -> None:
        ev = self.evaluator
        depth = len(prefix)
        if depth == ev.interval_count:
            return

        for length in self._candidates(prefix, start):
            self._tick()
            prefix.append(length)
            bound = self._bound(prefix)
            if depth + 1 == ev.interval_count:
                self._offer(tuple(prefix), bound)
            elif bound < self.best_objective or (
                bound == self.best_objective and tuple(prefix) <= self.best_lengths[: depth + 1]
            ):
                self._branch(prefix, start + length + ev.intergreen[depth])
            prefix.pop()

    def _candidates(self, prefix: Sequence[int], start: int) -> list[int]:
        """Lengths for the next interval, most promising first.

        Leading candidates end the green when some cluster of the phase has just
        cleared (the last one first). The rest follow in ascending order.
        """
        ev = self.evaluator
        depth = len(prefix)
        low, high = ev.bounds[depth]
        phase = ev.phases[depth]
        windows = ev.windows_for(prefix)[phase]
        windows.append((start, math.inf))
        breakpoints = {
            min(high, max(low, math.ceil(t - start)))
            for t in ev.completion_times(phase, windows)
            if t > start
        }
        ordered: list[int] = []
        if breakpoints:
            ordered.append(max(breakpoints))
        if low not in ordered:
            ordered.append(low)
        ordered.extend(sorted(breakpoints - set(ordered)))
        seen = set(ordered)
        ordered.extend(v for v in range(low, high + 1) if v not in seen)
        return ordered

    def _bound(self, prefix: Sequence[int]) -> float:
        ev = self.evaluator
        windows = ev.windows_for(prefix)
        depth = len(prefix)
        if depth == ev.interval_count:
            return ev.objective_for_windows(windows)

        if depth == 0:
            earliest = ev.origin
        else:
            last_end = windows[ev.phases[depth - 1]][-1][1]
            earliest = int(last_end) + ev.intergreen[depth - 1]
        latest = earliest
        for position in range(depth, ev.interval_count):
            low, high = ev.bounds[position]
            phase_windows = windows[ev.phases[position]]
            window = (earliest, latest + high)
            if phase_windows and window[0] <= phase_windows[-1][1]:
                merged_start = phase_windows[-1][0]
                phase_windows[-1] = (merged_start, max(phase_windows[-1][1], window[1]))
            else:
                phase_windows.append(window)
            earliest += low + ev.intergreen[position]
            latest += high + ev.intergreen[position]
        return ev.objective_for_windows(windows)


def solve(
    problem: ScheduleProblem,
    time_limit: float,
    warm_start: SignalTimingPlan | None = None,
    node_limit: int | None = None,
) -> Solution:
    """Minimize mean weighted waiting time over the problem's samples."""
    return BranchAndBoundSolver(problem, time_limit, node_limit).solve(warm_start)
