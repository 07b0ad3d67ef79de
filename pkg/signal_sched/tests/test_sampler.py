"""Tests for turn sampling and vehicle clustering."""

import math
import random

import numpy as np
import pytest

from signal_sched.exceptions import MissingTurnRowError, TurnNotPermittedError
from signal_sched.experiments.scenarios import build_isolated
from signal_sched.sampling.sampler import (
    AssignedVehicle,
    DetectedVehicle,
    InflowSampler,
    cluster_vehicles,
    draw_sample_set,
    expected_inflow,
    phase_discharge_headways,
    sample_turns,
)


def _phase_weight_before(sample, phase, cutoff):
    """Vehicle weight of one phase arriving strictly before ``cutoff``."""
    return math.fsum(
        member.weight
        for cluster in sample.per_phase[phase]
        for member in cluster.composition
        if member.arrival < cutoff
    )


def _assigned(etas, entry="a", exit_road="c"):
    return [
        AssignedVehicle(f"v{i}", entry, exit_road, eta) for i, eta in enumerate(etas)
    ]


class TestSampleTurns:
    """Test exit-road draws."""

    def test_turn_frequencies_match_probabilities(self, simple_intersection):
        """Empirical turn shares converge to the configured probabilities."""
        vehicles = [DetectedVehicle(f"v{i}", "a", 0.0) for i in range(10_000)]

        exits = sample_turns(vehicles, simple_intersection, np.random.default_rng(42))

        share = sum(1 for exit_road in exits.values() if exit_road == "c") / len(vehicles)
        assert abs(share - 0.7) <= 0.02

    def test_single_exit_is_deterministic(self, simple_intersection):
        vehicles = [DetectedVehicle(f"v{i}", "b", 0.0) for i in range(50)]

        exits = sample_turns(vehicles, simple_intersection, np.random.default_rng(0))

        assert set(exits.values()) == {"d"}

    def test_missing_turn_row(self, simple_intersection):
        """A vehicle on a road without turn probabilities is an error."""
        with pytest.raises(MissingTurnRowError, match="no turn probabilities"):
            sample_turns(
                [DetectedVehicle("v0", "z", 0.0)],
                simple_intersection,
                np.random.default_rng(0),
            )


class TestClusterVehicles:
    """Test proximity clustering."""

    def test_gap_threshold_splits_clusters(self, two_phase_model):
        """Gaps up to the threshold merge; larger gaps start a new cluster."""
        sample = cluster_vehicles(
            _assigned([0.0, 2.0, 5.0, 10.0]), two_phase_model, discharge_headway=2.0
        )

        clusters = sample.per_phase[0]
        assert [c.count for c in clusters] == [3.0, 1.0]
        assert clusters[0].arrival == 0.0
        assert clusters[0].length == 6.0  # three vehicles at 2 s beat the 5 s span
        assert clusters[1].arrival == 10.0
        assert clusters[1].length == 2.0
        assert sample.per_phase[1] == ()

    def test_span_exceeds_saturation_length(self, two_phase_model):
        sample = cluster_vehicles(
            _assigned([0.0, 3.0, 6.0]), two_phase_model, discharge_headway=1.0
        )

        (cluster,) = sample.per_phase[0]
        assert cluster.length == 6.0

    def test_resolution_snaps_up(self, two_phase_model):
        """Arrival and length are rounded up onto the controller grid."""
        sample = cluster_vehicles(
            _assigned([0.5, 1.2]), two_phase_model, discharge_headway=1.7, resolution=1.0
        )

        (cluster,) = sample.per_phase[0]
        assert cluster.arrival == 1.0
        assert cluster.length == 4.0
        assert [m.vehicle_id for m in cluster.composition] == ["v0", "v1"]

    def test_vehicles_go_to_their_phase(self, two_phase_model):
        assigned = [
            AssignedVehicle("v0", "a", "c", 1.0),
            AssignedVehicle("v1", "a", "d", 1.0),
            AssignedVehicle("v2", "b", "d", 2.0),
        ]

        sample = cluster_vehicles(assigned, two_phase_model, discharge_headway=1.0)

        assert [c.count for c in sample.per_phase[0]] == [1.0]
        assert [c.count for c in sample.per_phase[1]] == [2.0]

    def test_unpermitted_turn(self, two_phase_model):
        with pytest.raises(TurnNotPermittedError):
            cluster_vehicles([AssignedVehicle("v0", "b", "c", 0.0)], two_phase_model)

    def test_non_positive_threshold(self, two_phase_model):
        with pytest.raises(ValueError, match="merge_threshold"):
            cluster_vehicles(_assigned([0.0]), two_phase_model, merge_threshold=0.0)


class TestExpectedInflow:
    """Test the expected-inflow construction."""

    def test_fractional_copies(self, simple_intersection, two_phase_model):
        """Each vehicle contributes its turn probability to every phase it may use."""
        sample = expected_inflow(
            [DetectedVehicle("v0", "a", 4.0)],
            simple_intersection,
            two_phase_model,
            discharge_headway=1.0,
        )

        assert [c.count for c in sample.per_phase[0]] == [pytest.approx(0.7)]
        assert [c.count for c in sample.per_phase[1]] == [pytest.approx(0.3)]
        assert sample.total_count == pytest.approx(1.0)

    def test_missing_turn_row(self, simple_intersection, two_phase_model):
        with pytest.raises(MissingTurnRowError):
            expected_inflow(
                [DetectedVehicle("v0", "z", 4.0)], simple_intersection, two_phase_model
            )


class TestDrawSampleSet:
    """Test seeded sample sets."""

    def test_same_seed_same_samples(self, simple_intersection):
        vehicles = [DetectedVehicle(f"v{i}", "a", float(i)) for i in range(20)]

        first = draw_sample_set(vehicles, simple_intersection, 5, seed=[7, 0, 12])
        second = draw_sample_set(vehicles, simple_intersection, 5, seed=[7, 0, 12])

        assert first.samples == second.samples
        assert len(first) == 5

    def test_substreams_do_not_depend_on_count(self, simple_intersection):
        """Sample j is the same whether 5 or 10 samples are drawn."""
        vehicles = [DetectedVehicle(f"v{i}", "a", float(i)) for i in range(20)]

        small = draw_sample_set(vehicles, simple_intersection, 5, seed=3)
        large = draw_sample_set(vehicles, simple_intersection, 10, seed=3)

        assert large.samples[:5] == small.samples

    def test_per_sample_vehicles(self, simple_intersection):
        """Each sample may be drawn from its own extended observation."""
        per_sample = [
            [DetectedVehicle("v0", "b", 1.0)],
            [DetectedVehicle("v0", "b", 1.0), DetectedVehicle("v1", "b", 9.0)],
        ]

        sample_set = draw_sample_set(
            [], simple_intersection, 2, seed=0, per_sample_vehicles=per_sample
        )

        assert sample_set.samples[0].total_count == 1.0
        assert sample_set.samples[1].total_count == 2.0

    def test_count_validation(self, simple_intersection):
        with pytest.raises(ValueError, match="at least 1"):
            draw_sample_set([], simple_intersection, 0, seed=0)
        with pytest.raises(ValueError, match="per-sample"):
            draw_sample_set([], simple_intersection, 2, seed=0, per_sample_vehicles=[[]])


class TestInflowSampler:
    """Test the per-intersection sampler."""

    def test_isolated_discharge_headways(self):
        """Every isolated phase discharges two two-lane approaches."""
        scenario = build_isolated()
        cfg = scenario.topology.intersections["I"]

        headways = phase_discharge_headways(cfg, scenario.topology, 2.5)

        assert headways == (0.625, 0.625, 0.625, 0.625)

    def test_draw_and_expected_are_on_the_grid(self, simple_intersection):
        sampler = InflowSampler(simple_intersection, discharge_headway=1.0)
        vehicles = [DetectedVehicle("v0", "a", 0.4), DetectedVehicle("v1", "b", 2.2)]

        drawn = sampler.draw(vehicles, 3, seed=1)
        expected = sampler.expected(vehicles)

        assert len(drawn) == 3
        assert len(expected) == 1
        for sample in (*drawn.samples, *expected.samples):
            for clusters in sample.per_phase:
                for cluster in clusters:
                    assert float(cluster.arrival).is_integer()
                    assert float(cluster.length).is_integer()


class TestSamplingStatistics:
    """Test sample sets against the expected inflow they estimate."""

    @pytest.fixture
    def mixed_arrivals(self):
        """Thirty uncertain vehicles on a, ten certain ones on b, one per second."""
        on_a = [DetectedVehicle(f"a{i:02d}", "a", float(i)) for i in range(30)]
        on_b = [DetectedVehicle(f"b{i:02d}", "b", float(2 * i)) for i in range(10)]
        return on_a + on_b

    def test_sampled_mean_arrivals_match_expectation(self, simple_intersection, mixed_arrivals):
        """Mean sampled phase arrivals per window lie within three standard errors."""
        draws = 2000
        sample_set = draw_sample_set(mixed_arrivals, simple_intersection, draws, seed=11)
        expected = expected_inflow(
            mixed_arrivals, simple_intersection, simple_intersection.phase_model
        )

        for cutoff, uncertain in ((15.0, 15), (30.0, 30)):
            sampled = np.array(
                [_phase_weight_before(sample, 0, cutoff) for sample in sample_set.samples]
            )
            mean = _phase_weight_before(expected, 0, cutoff)
            standard_error = math.sqrt(uncertain * 0.7 * 0.3 / draws)

            assert mean == pytest.approx(0.7 * uncertain)
            assert abs(sampled.mean() - mean) <= 3 * standard_error

    def test_every_vehicle_appears_once_per_sample(self, simple_intersection):
        """Each sample holds every detected vehicle exactly once with its weight."""
        vehicles = [
            DetectedVehicle(f"v{i}", "a" if i % 3 else "b", float(i % 7), weight=0.5 if i % 4 == 0 else 1.0)
            for i in range(25)
        ]
        total_weight = math.fsum(v.weight for v in vehicles)

        sample_set = draw_sample_set(vehicles, simple_intersection, 8, seed=[2, 0, 5])

        for sample in sample_set.samples:
            members = [
                member
                for clusters in sample.per_phase
                for cluster in clusters
                for member in cluster.composition
            ]
            assert sorted(m.vehicle_id for m in members) == sorted(v.vehicle_id for v in vehicles)
            assert sample.total_count == pytest.approx(total_weight)
            for clusters in sample.per_phase:
                for cluster in clusters:
                    assert cluster.count == pytest.approx(
                        math.fsum(m.weight for m in cluster.composition)
                    )

    def test_expected_inflow_conserves_weight(self, simple_intersection, mixed_arrivals):
        expected = expected_inflow(
            mixed_arrivals, simple_intersection, simple_intersection.phase_model
        )

        assert expected.total_count == pytest.approx(len(mixed_arrivals))
        assert _phase_weight_before(expected, 1, math.inf) == pytest.approx(30 * 0.3 + 10)


class TestClusteringIdempotence:
    """Re-clustering the members of a sample reproduces it."""

    def test_reclustering_members_is_a_fixed_point(self, two_phase_model):
        entries = {"v0": "a", "v1": "a", "v2": "a", "v3": "b", "v4": "a", "v5": "b"}
        assigned = [
            AssignedVehicle("v0", "a", "c", 0.0),
            AssignedVehicle("v1", "a", "c", 2.5),
            AssignedVehicle("v2", "a", "d", 3.0, weight=0.3),
            AssignedVehicle("v3", "b", "d", 4.0),
            AssignedVehicle("v4", "a", "c", 12.0),
            AssignedVehicle("v5", "b", "d", 20.0),
        ]
        sample = cluster_vehicles(assigned, two_phase_model, discharge_headway=1.5)

        rebuilt = [
            AssignedVehicle(m.vehicle_id, entries[m.vehicle_id], m.exit_road, m.arrival, m.weight)
            for clusters in sample.per_phase
            for cluster in clusters
            for m in cluster.composition
        ]

        assert cluster_vehicles(rebuilt, two_phase_model, discharge_headway=1.5) == sample

    def test_input_order_does_not_matter(self, two_phase_model):
        assigned = _assigned([0.0, 1.0, 1.0, 4.5, 9.0, 9.5, 20.0])
        shuffled = list(assigned)
        random.Random(3).shuffle(shuffled)

        assert cluster_vehicles(shuffled, two_phase_model, resolution=1.0) == cluster_vehicles(
            assigned, two_phase_model, resolution=1.0
        )
