"""Warm starts: carry the previous decision's plan forward to the next one."""

from loguru import logger

from ..traffic.model import InitialConditions, Interval, PhaseModel, SignalTimingPlan
from .feasibility import check_plan


def guided_search_shift(
    previous_plan: SignalTimingPlan,
    elapsed: int,
    new_initial: InitialConditions,
    phase_model: PhaseModel,
) -> SignalTimingPlan | None:
    """Translate ``previous_plan`` to the decision ``elapsed`` seconds later.

    Intervals of phases that have ended are dropped, the current interval's
    start is pinned to the actual green onset, and the horizon is refilled with
    minimum greens. Returns None when the shifted plan breaks any bound.
    """
    if elapsed < 0:
        raise ValueError("elapsed must be non-negative")
    now = previous_plan.decision_time + elapsed
    phase_count = len(phase_model)

    intervals = list(previous_plan.intervals)
    while intervals and intervals[0].phase != new_initial.current_phase:
        intervals.pop(0)
    if not intervals:
        return None

    shift = (now - new_initial.elapsed_green) - intervals[0].start
    total = previous_plan.horizon_cycles * phase_count
    shifted: list[Interval] = []
    for position, iv in enumerate(intervals[:total]):
        shifted.append(
            Interval(
                phase=iv.phase,
                cycle=position // phase_count,
                start=iv.start + shift,
                end=iv.end + shift,
            )
        )
    while len(shifted) < total:
        last = shifted[-1]
        phase_index = (last.phase + 1) % phase_count
        start = last.end + phase_model[last.phase].intergreen
        shifted.append(
            Interval(
                phase=phase_index,
                cycle=len(shifted) // phase_count,
                start=start,
                end=start + phase_model[phase_index].g_min,
            )
        )

    plan = SignalTimingPlan(
        intervals=tuple(shifted),
        horizon_cycles=previous_plan.horizon_cycles,
        decision_time=now,
    )
    violations = check_plan(plan, phase_model, new_initial, now)
    if violations:
        logger.debug(f"Shifted plan rejected at t={now}: {violations[0]}")
        return None
    return plan
