"""Extend/terminate decision for the current phase."""

from ..traffic.model import DecisionAction, Extend, Terminate
from .problem import Solution, SolveStatus


def decide_action(solution: Solution, now: int, resolution: int = 1) -> DecisionAction:
    if solution.status is SolveStatus.INFEASIBLE or solution.plan is None:
        raise ValueError(f"Cannot decide from an infeasible solution: {solution.diagnostics}")
    remaining = solution.plan.first.end - now
    if remaining <= 0:
        return Terminate()
    return Extend(min(resolution, remaining))
