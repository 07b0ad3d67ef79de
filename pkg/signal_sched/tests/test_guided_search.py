"""Tests for warm-start plan shifting and the extend/terminate decision."""

import pytest

from signal_sched.scheduling.decision import decide_action
from signal_sched.scheduling.guided import guided_search_shift
from signal_sched.scheduling.problem import Solution, SolveStatus
from signal_sched.traffic.model import ClusterSchedule, Extend, InitialConditions, Terminate


@pytest.fixture
def previous_plan(make_problem):
    """Phase 0 green over [10, 16), phase 1 over [17, 21), decided at t=10."""
    return make_problem([[[], []]], now=10).plan_from_lengths((6, 4))


class TestGuidedSearchShift:
    """Test carrying a plan forward to the next decision."""

    def test_same_phase_keeps_intervals(self, previous_plan, two_phase_model):
        shifted = guided_search_shift(
            previous_plan, 3, InitialConditions(0, 3), two_phase_model
        )

        assert shifted is not None
        assert shifted.decision_time == 13
        assert shifted.intervals == previous_plan.intervals

    def test_phase_change_refills_horizon(self, previous_plan, two_phase_model):
        """Ended phases drop out and minimum greens refill the horizon."""
        shifted = guided_search_shift(
            previous_plan, 8, InitialConditions(1, 1), two_phase_model
        )

        assert shifted is not None
        assert [(iv.phase, iv.cycle, iv.start, iv.end) for iv in shifted.intervals] == [
            (1, 0, 17, 21),
            (0, 0, 22, 24),
        ]

    def test_onset_drift_is_absorbed(self, previous_plan, two_phase_model):
        """The current interval is pinned to the actual green onset."""
        shifted = guided_search_shift(
            previous_plan, 9, InitialConditions(1, 1), two_phase_model
        )

        assert shifted is not None
        assert shifted.first.start == 18
        assert shifted.first.end == 22

    def test_overrun_plan_is_rejected(self, previous_plan, two_phase_model):
        """A plan whose current interval already ended is not a valid warm start."""
        assert (
            guided_search_shift(previous_plan, 8, InitialConditions(0, 8), two_phase_model)
            is None
        )

    def test_negative_elapsed(self, previous_plan, two_phase_model):
        with pytest.raises(ValueError, match="non-negative"):
            guided_search_shift(previous_plan, -1, InitialConditions(0, 0), two_phase_model)


class TestDecideAction:
    """Test the decision taken from a solved plan."""

    @staticmethod
    def _solution(plan):
        return Solution(
            plan=plan,
            schedules=ClusterSchedule(fragments={}),
            objective=0.0,
            status=SolveStatus.OPTIMAL,
        )

    def test_terminate_when_green_ends_now(self, make_problem):
        problem = make_problem([[[], []]], elapsed_green=4)
        solution = self._solution(problem.plan_from_lengths((4, 3)))

        assert decide_action(solution, 10) == Terminate()

    def test_extend_by_resolution(self, make_problem):
        problem = make_problem([[[], []]], elapsed_green=4)
        solution = self._solution(problem.plan_from_lengths((9, 3)))

        assert decide_action(solution, 10) == Extend(1)
        assert decide_action(solution, 10, resolution=3) == Extend(3)
        assert decide_action(solution, 10, resolution=10) == Extend(5)

    def test_infeasible_solution(self):
        solution = Solution(
            plan=None,
            schedules=ClusterSchedule(fragments={}),
            objective=float("inf"),
            status=SolveStatus.INFEASIBLE,
            diagnostics="elapsed green too long",
        )

        with pytest.raises(ValueError, match="elapsed green too long"):
            decide_action(solution, 10)
