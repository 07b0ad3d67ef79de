from .debug_dump import format_problem, format_solution, parse_problem
from .decision import decide_action
from .dispatch import (
    PlanEvaluator,
    collapse_samples,
    dispatch_given_plan,
    dispatch_phase,
    evaluate_solution,
)
from .feasibility import check_plan, check_schedule, check_solution
from .guided import guided_search_shift
from .oracle import ENUMERATION_LIMIT, brute_force_oracle, enumeration_size
from .problem import ScheduleProblem, Solution, SolveStats, SolveStatus
from .solver import BranchAndBoundSolver, solve

__all__ = [
    "ENUMERATION_LIMIT",
    "BranchAndBoundSolver",
    "PlanEvaluator",
    "ScheduleProblem",
    "Solution",
    "SolveStats",
    "SolveStatus",
    "brute_force_oracle",
    "check_plan",
    "check_schedule",
    "check_solution",
    "collapse_samples",
    "decide_action",
    "dispatch_given_plan",
    "dispatch_phase",
    "enumeration_size",
    "evaluate_solution",
    "format_problem",
    "format_solution",
    "guided_search_shift",
    "parse_problem",
    "solve",
]
