"""Sample-based outflow messages between neighbouring intersections."""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from loguru import logger

from ..exceptions import SampleCountMismatchError
from ..sampling.sampler import DetectedVehicle, SampleSet
from ..scheduling.problem import Solution, SolveStatus
from ..traffic.model import Cluster, Fragment, NetworkTopology, NodeId, RoadId


@dataclass(frozen=True)
class ProjectedVehicle:
    vehicle_id: str
    projected_arrival: float  # at the receiver's stop line, seconds
    weight: float = 1.0


@dataclass(frozen=True)
class OutflowMessage:
    """Projected arrivals on one link, one list per sender sample."""

    sender: NodeId
    receiver: NodeId
    link: RoadId
    per_sample: tuple[tuple[ProjectedVehicle, ...], ...]
    sent_at: int = 0

    @property
    def sample_count(self) -> int:
        return len(self.per_sample)

    def to_record(self) -> dict[str, Any]:
        return {
            "sender": self.sender,
            "receiver": self.receiver,
            "link": self.link,
            "sent_at": self.sent_at,
            "per_sample": [
                [[v.vehicle_id, v.projected_arrival, v.weight] for v in vehicles]
                for vehicles in self.per_sample
            ],
        }


def _departures(
    cluster: Cluster, pieces: Sequence[tuple[int, Fragment]], horizon: int
) -> list[float | None]:
    """Departure time of each composition member; None for spilled mass.

    Members are spaced over the cluster's service time in proportion to their
    weights, and the service time is laid over the fragments in cycle order.
    """
    members = cluster.composition
    total_weight = math.fsum(m.weight for m in members)
    result: list[float | None] = []
    cumulative = 0.0
    for member in members:
        offset = cluster.length * cumulative / total_weight
        cumulative += member.weight
        departure: float | None = None
        consumed = 0.0
        for index, (cycle, fragment) in enumerate(pieces):
            if offset < consumed + fragment.length or index == len(pieces) - 1:
                if cycle < horizon:
                    departure = fragment.start + min(offset - consumed, fragment.length)
                break
            consumed += fragment.length
        result.append(departure)
    return result


def project_outflows(
    solution: Solution,
    samples: SampleSet,
    topology: NetworkTopology,
    speed: float,
    intersection_id: NodeId,
) -> list[OutflowMessage]:
    """Project every sampled vehicle bound for a neighbour onto its exit link."""
    if solution.status is SolveStatus.INFEASIBLE or solution.plan is None:
        raise ValueError("Cannot project outflows of an infeasible solution")

    horizon = solution.plan.horizon_cycles
    count = len(samples)
    by_link: dict[RoadId, list[list[ProjectedVehicle]]] = {}
    for s, sample in enumerate(samples.samples):
        for k, clusters in enumerate(sample.per_phase):
            for q, cluster in enumerate(clusters):
                if not cluster.composition:
                    continue
                pieces = solution.schedules.for_cluster(s, k, q)
                if not pieces:
                    continue
                for member, departure in zip(
                    cluster.composition, _departures(cluster, pieces, horizon), strict=True
                ):
                    if departure is None or topology.is_sink(member.exit_road):
                        continue
                    travel = topology.road(member.exit_road).length / speed
                    by_link.setdefault(member.exit_road, [[] for _ in range(count)])[s].append(
                        ProjectedVehicle(member.vehicle_id, departure + travel, member.weight)
                    )

    messages = []
    for link in sorted(by_link):
        receiver = topology.downstream(link)
        assert receiver is not None
        messages.append(
            OutflowMessage(
                sender=intersection_id,
                receiver=receiver,
                link=link,
                per_sample=tuple(
                    tuple(sorted(vehicles, key=lambda v: (v.projected_arrival, v.vehicle_id)))
                    for vehicles in by_link[link]
                ),
                sent_at=solution.plan.decision_time,
            )
        )
    return messages


def merge_nonlocal(
    local: Sequence[DetectedVehicle],
    inbox: Sequence[OutflowMessage],
    now: float,
    horizon_extension: float,
    local_horizon: Mapping[RoadId, float] | None = None,
    sample_count: int = 1,
) -> list[list[DetectedVehicle]]:
    """Extend the local observation with announced arrivals, one list per sample.

    Sample ``s`` takes index ``s`` from every sender. An announced vehicle is
    admitted when it arrives no later than the link's local observation horizon
    plus ``horizon_extension``; locally observed vehicles take precedence.
    """
    for message in inbox:
        if message.sample_count != sample_count:
            raise SampleCountMismatchError(
                f"Message from {message.sender} on {message.link} carries "
                f"{message.sample_count} samples, receiver expects {sample_count}"
            )

    horizons = local_horizon or {}
    local_ids = {v.vehicle_id for v in local}
    extended: list[list[DetectedVehicle]] = []
    ordered = sorted(inbox, key=lambda m: (m.sender, m.link))
    for s in range(sample_count):
        seen = set(local_ids)
        vehicles = list(local)
        for message in ordered:
            cutoff = now + horizons.get(message.link, 0.0) + horizon_extension
            for projected in message.per_sample[s]:
                if projected.projected_arrival > cutoff or projected.vehicle_id in seen:
                    continue
                seen.add(projected.vehicle_id)
                vehicles.append(
                    DetectedVehicle(
                        vehicle_id=projected.vehicle_id,
                        entry_road=message.link,
                        eta=max(float(now), projected.projected_arrival),
                        weight=projected.weight,
                    )
                )
        extended.append(vehicles)

    if inbox:
        added = sum(len(v) for v in extended) - len(local) * sample_count
        logger.debug(f"Merged {added} non-local vehicle(s) from {len(inbox)} message(s) at t={now}")
    return extended


def messages_by_receiver(messages: Sequence[OutflowMessage]) -> dict[NodeId, list[OutflowMessage]]:
    grouped: dict[NodeId, list[OutflowMessage]] = defaultdict(list)
    for message in messages:
        grouped[message.receiver].append(message)
    return dict(grouped)
