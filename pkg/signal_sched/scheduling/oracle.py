"""Exhaustive plan enumeration used to verify the branch-and-bound solver."""

import itertools
import math
import time

from loguru import logger

from ..exceptions import OracleTooLargeError
from .dispatch import PlanEvaluator
from .problem import ScheduleProblem, Solution, SolveStats, SolveStatus

ENUMERATION_LIMIT = 10**7


def enumeration_size(problem: ScheduleProblem) -> int:
    return math.prod(
        max(0, high - low + 1)
        for low, high in (problem.length_bounds(j) for j in range(problem.interval_count))
    )


def brute_force_oracle(problem: ScheduleProblem) -> Solution:
    """Evaluate every integer plan; ties go to the smallest length vector."""
    size = enumeration_size(problem)
    if size > ENUMERATION_LIMIT:
        raise OracleTooLargeError(
            f"{size} plans exceed the enumeration limit of {ENUMERATION_LIMIT}"
        )
    if size == 0:
        raise OracleTooLargeError("The problem admits no plan to enumerate")

    started = time.monotonic()
    evaluator = PlanEvaluator(problem)
    ranges = [range(low, high + 1) for low, high in evaluator.bounds]
    best_lengths: tuple[int, ...] = ()
    best_objective = math.inf
    for lengths in itertools.product(*ranges):
        objective = evaluator.objective(lengths)
        if objective < best_objective:
            best_objective = objective
            best_lengths = lengths

    elapsed = time.monotonic() - started
    logger.debug(f"Oracle enumerated {size} plans in {elapsed:.2f}s, best {best_objective:.3f}")
    return Solution(
        plan=problem.plan_from_lengths(best_lengths),
        schedules=evaluator.schedules(best_lengths),
        objective=best_objective,
        status=SolveStatus.OPTIMAL,
        stats=SolveStats(nodes=size, elapsed=elapsed),
    )
