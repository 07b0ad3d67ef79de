"""Tests for FIFO dispatch and objective evaluation."""

import pytest

from signal_sched.exceptions import DanglingFragmentError
from signal_sched.sampling.sampler import SampleSet
from signal_sched.scheduling.dispatch import (
    PlanEvaluator,
    collapse_samples,
    dispatch_given_plan,
    dispatch_phase,
    evaluate_solution,
)
from signal_sched.traffic.model import Cluster, ClusterSchedule, Fragment, InflowSample


class TestDispatchPhase:
    """Test single-phase greedy dispatch."""

    def test_waits_for_green(self):
        """A cluster arriving before green departs at the window start."""
        record = []
        delay, finish = dispatch_phase([(0.0, 4.0, 2.0)], [(2.0, 10.0)], 100.0, record)

        assert delay == 4.0  # 2 vehicles, 2 s each
        assert finish == 6.0
        assert record == [(0, 0, 2.0, 4.0)]

    def test_split_across_windows(self):
        """Mass that does not fit one window continues in the next."""
        record = []
        delay, finish = dispatch_phase(
            [(0.0, 6.0, 3.0)], [(0.0, 4.0), (10.0, 20.0)], 100.0, record
        )

        assert record == [(0, 0, 0.0, 4.0), (0, 1, 10.0, 2.0)]
        assert delay == 10.0
        assert finish == 12.0

    def test_spill_after_last_window(self):
        """Unserved mass departs from the spill time with window index len(windows)."""
        record = []
        delay, _ = dispatch_phase([(0.0, 6.0, 3.0)], [(0.0, 4.0)], 50.0, record)

        assert record[-1] == (0, 1, 50.0, 2.0)
        assert delay == 50.0

    def test_fifo_order(self):
        """A later cluster waits for its predecessor to clear."""
        record = []
        delay, finish = dispatch_phase(
            [(0.0, 4.0, 1.0), (1.0, 2.0, 1.0)], [(0.0, 10.0)], 100.0, record
        )

        assert record == [(0, 0, 0.0, 4.0), (1, 0, 4.0, 2.0)]
        assert delay == 3.0
        assert finish == 6.0

    def test_no_clusters(self):
        assert dispatch_phase([], [(0.0, 10.0)], 100.0) == (0.0, float("-inf"))


class TestEvaluation:
    """Test plan evaluation and the objective identity."""

    def test_dispatch_given_plan_matches_evaluation(self, make_problem):
        """The dispatch delay equals the objective recomputed from fragments."""
        problem = make_problem(
            [[[(10.0, 4.0, 2.0), (20.0, 2.0, 1.0)], [(11.0, 8.0, 4.0)]]],
            horizon_cycles=2,
        )
        plan = problem.plan_from_lengths((5, 6, 7, 4))

        schedules, delay = dispatch_given_plan(plan, problem.samples.samples[0])

        assert evaluate_solution(plan, schedules, problem.samples) == pytest.approx(delay)

    def test_evaluator_matches_dispatch(self, make_problem):
        problem = make_problem(
            [[[(10.0, 4.0, 2.0)], [(12.0, 2.0, 1.0)]], [[(14.0, 2.0, 1.0)], []]],
            horizon_cycles=2,
        )
        evaluator = PlanEvaluator(problem)
        lengths = (4, 3, 2, 2)
        plan = problem.plan_from_lengths(lengths)

        schedules = evaluator.schedules(lengths)

        assert evaluator.objective(lengths) == pytest.approx(
            evaluate_solution(plan, schedules, problem.samples)
        )

    def test_dangling_fragment(self, make_problem):
        """A fragment for a cluster that does not exist is rejected."""
        problem = make_problem([[[(10.0, 2.0, 1.0)], []]])
        plan = problem.plan_from_lengths((4, 3))
        schedules = ClusterSchedule(fragments={(0, 1, 0, 0): Fragment(15.0, 2.0)})

        with pytest.raises(DanglingFragmentError):
            evaluate_solution(plan, schedules, problem.samples)


class TestCollapseSamples:
    """Test merging of identical samples."""

    def test_identical_samples_merge(self):
        one = InflowSample(per_phase=((Cluster(1.0, 10.0, 2.0),), ()))
        other = InflowSample(per_phase=((Cluster(2.0, 10.0, 2.0),), ()))

        unique = collapse_samples(SampleSet(samples=(one, one, other)))

        assert [u.members for u in unique] == [(0, 1), (2,)]
        assert [u.weight for u in unique] == [pytest.approx(2 / 3), pytest.approx(1 / 3)]

    def test_composition_is_ignored(self):
        """Samples that differ only in cluster membership schedule identically."""
        one = InflowSample(per_phase=((Cluster(1.0, 10.0, 2.0),),))
        other = InflowSample(per_phase=((Cluster(1.0, 10.0, 2.0, composition=()),),))

        assert len(collapse_samples(SampleSet(samples=(one, other)))) == 1
