"""Tests for outflow messages and the round-based message bus."""

import numpy as np
import pytest

from signal_sched.coordination.bus import MessageBus, read_message_log
from signal_sched.coordination.messages import (
    OutflowMessage,
    ProjectedVehicle,
    merge_nonlocal,
    messages_by_receiver,
    project_outflows,
)
from signal_sched.exceptions import SampleCountMismatchError
from signal_sched.experiments.scenarios import build_arterial
from signal_sched.sampling.sampler import DetectedVehicle, InflowSampler, phase_discharge_headways
from signal_sched.scheduling.problem import ScheduleProblem
from signal_sched.scheduling.solver import solve
from signal_sched.traffic.model import InitialConditions


def _message(sender="A0", link="A0_A1", receiver="A1", per_sample=None, sent_at=0):
    return OutflowMessage(
        sender=sender,
        receiver=receiver,
        link=link,
        per_sample=per_sample or ((ProjectedVehicle("v9", 40.0),),),
        sent_at=sent_at,
    )


class TestProjectOutflows:
    """Test projection of scheduled departures onto outgoing links."""

    @pytest.fixture
    def arterial(self):
        return build_arterial().topology

    def _solve(self, topology, node, vehicles, *, current_phase=1, sample_count=None, horizon=1):
        """Solve at one intersection on expected inflow, or on drawn samples."""
        cfg = topology.intersections[node]
        sampler = InflowSampler(cfg, phase_discharge_headways(cfg, topology, 2.5))
        if sample_count is None:
            samples = sampler.expected(vehicles)
        else:
            samples = sampler.draw(vehicles, sample_count, seed=[5, 0, 10])
        problem = ScheduleProblem(
            phase_model=cfg.phase_model,
            initial=InitialConditions(current_phase=current_phase, elapsed_green=0),
            now=10,
            horizon_cycles=horizon,
            samples=samples,
        )
        return solve(problem, time_limit=5.0, node_limit=500), samples

    def _solve_at_a0(self, topology, vehicles):
        return self._solve(topology, "A0", vehicles)

    def test_through_vehicle_reaches_neighbor(self, arterial):
        """A vehicle released at once arrives one link travel time later."""
        solution, samples = self._solve_at_a0(
            arterial, [DetectedVehicle("v1", "W_A0", 10.0)]
        )

        messages = project_outflows(solution, samples, arterial, 10.0, "A0")

        assert messages == [
            OutflowMessage(
                sender="A0",
                receiver="A1",
                link="A0_A1",
                per_sample=((ProjectedVehicle("v1", 35.0, 1.0),),),
                sent_at=10,
            )
        ]

    def test_vehicles_leaving_the_network_are_not_announced(self, arterial):
        solution, samples = self._solve_at_a0(
            arterial, [DetectedVehicle("v1", "N0_A0", 10.0)]
        )

        assert project_outflows(solution, samples, arterial, 10.0, "A0") == []

    def test_sample_index_alignment(self, arterial):
        """Message index s lists exactly the vehicles sample s sends onto the link."""
        vehicles = [DetectedVehicle(f"v{i}", "A1_A2", 10.0 + i) for i in range(6)]
        solution, samples = self._solve(
            arterial, "A2", vehicles, current_phase=0, sample_count=3, horizon=2
        )

        (message,) = project_outflows(solution, samples, arterial, 10.0, "A2")

        assert (message.link, message.receiver) == ("A2_A3", "A3")
        assert message.sample_count == 3
        for sample, announced in zip(samples.samples, message.per_sample, strict=True):
            through = {
                member.vehicle_id
                for clusters in sample.per_phase
                for cluster in clusters
                for member in cluster.composition
                if member.exit_road == "A2_A3"
            }
            assert {v.vehicle_id for v in announced} == through
            assert len(announced) == len(through)

    def test_deterministic_turns_give_identical_samples(self, arterial):
        """On a through-only crossing every sample announces the same arrivals."""
        vehicles = [DetectedVehicle(f"v{i}", "W_A0", 10.0 + 2 * i) for i in range(4)]
        solution, samples = self._solve(arterial, "A0", vehicles, sample_count=3)

        (message,) = project_outflows(solution, samples, arterial, 10.0, "A0")

        first, *rest = message.per_sample
        assert [v.vehicle_id for v in first] == ["v0", "v1", "v2", "v3"]
        assert all(other == first for other in rest)


class TestMergeNonlocal:
    """Test extension of local observations with announced arrivals."""

    def test_horizon_cutoff_per_sample(self):
        """Sample s reads index s of every message, up to the extended horizon."""
        inbox = [
            _message(
                per_sample=(
                    (ProjectedVehicle("v2", 30.0), ProjectedVehicle("v3", 80.0)),
                    (ProjectedVehicle("v2", 31.0),),
                )
            )
        ]
        local = [DetectedVehicle("v1", "W_A1", 12.0)]

        extended = merge_nonlocal(
            local, inbox, 10, 20.0, {"A0_A1": 25.0}, sample_count=2
        )

        assert [[v.vehicle_id for v in vehicles] for vehicles in extended] == [
            ["v1", "v2"],
            ["v1", "v2"],
        ]
        assert extended[0][1] == DetectedVehicle("v2", "A0_A1", 30.0)
        assert extended[1][1].eta == 31.0

    def test_local_observation_wins(self):
        inbox = [_message(per_sample=((ProjectedVehicle("v1", 15.0),),))]
        local = [DetectedVehicle("v1", "A0_A1", 12.0)]

        (vehicles,) = merge_nonlocal(local, inbox, 10, 20.0)

        assert vehicles == local

    def test_past_arrival_is_clamped_to_now(self):
        inbox = [_message(per_sample=((ProjectedVehicle("v5", 5.0),),))]

        (vehicles,) = merge_nonlocal([], inbox, 10, 20.0)

        assert vehicles[0].eta == 10.0

    def test_vehicle_announced_twice_is_merged_once(self):
        """Two senders announcing one vehicle add it once, from the first sender."""
        inbox = [
            _message(sender="A2", link="A2_A1", per_sample=((ProjectedVehicle("v7", 22.0),),)),
            _message(sender="A0", link="A0_A1", per_sample=((ProjectedVehicle("v7", 20.0),),)),
        ]

        (vehicles,) = merge_nonlocal([], inbox, 10, 20.0)

        assert vehicles == [DetectedVehicle("v7", "A0_A1", 20.0)]

    def test_longer_extension_admits_a_superset(self):
        rng = np.random.default_rng(8)
        arrivals = rng.uniform(0.0, 120.0, size=(2, 30))
        inbox = [
            _message(
                sender=sender,
                link=f"{sender}_A1",
                per_sample=(
                    tuple(
                        ProjectedVehicle(f"{sender}v{i}", float(t))
                        for i, t in enumerate(arrivals[row])
                    ),
                ),
            )
            for row, sender in enumerate(("A0", "A2"))
        ]
        local = [DetectedVehicle("v1", "W_A1", 12.0)]
        horizons = {"A0_A1": 25.0, "A2_A1": 10.0}

        admitted = [
            {v.vehicle_id for v in merge_nonlocal(local, inbox, 10, extension, horizons)[0]}
            for extension in (0.0, 5.0, 20.0, 45.0, 200.0)
        ]

        for shorter, longer in zip(admitted, admitted[1:], strict=False):
            assert "v1" in shorter
            assert shorter <= longer
        assert len(admitted[-1]) == 61
        assert len(admitted[0]) < len(admitted[-1])

    def test_sample_count_mismatch(self):
        with pytest.raises(SampleCountMismatchError, match="carries 1 samples"):
            merge_nonlocal([], [_message()], 10, 20.0, sample_count=3)

    def test_messages_by_receiver(self):
        one = _message()
        other = _message(sender="A2", link="A2_A1")
        third = _message(sender="A1", link="A1_A2", receiver="A2")

        assert messages_by_receiver([one, other, third]) == {
            "A1": [one, other],
            "A2": [third],
        }


class TestMessageBus:
    """Test round delivery and the message log."""

    def test_messages_arrive_next_round(self):
        bus = MessageBus()
        message = _message()

        bus.publish([message])
        assert bus.inbox("A1") == []

        assert bus.barrier() == 1
        assert bus.inbox("A1") == [message]

        bus.barrier()
        assert bus.inbox("A1") == []

    def test_latest_message_per_link_wins(self):
        bus = MessageBus()
        bus.publish([_message(sent_at=1)])
        bus.publish([_message(sent_at=2)])

        bus.barrier()

        assert [m.sent_at for m in bus.inbox("A1")] == [2]

    def test_message_log_replays(self, temp_dir):
        path = temp_dir / "messages.jsonl"
        first = _message(sent_at=3)
        second = _message(sender="A2", link="A2_A1", sent_at=4)

        with MessageBus(path) as bus:
            bus.publish([first])
            bus.barrier()
            bus.publish([second])
            bus.barrier()

        assert read_message_log(path) == [(0, first), (1, second)]
