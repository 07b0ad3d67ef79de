"""Per-intersection schedule-driven controller."""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum

from loguru import logger

from ..coordination.messages import OutflowMessage, merge_nonlocal, project_outflows
from ..sampling.sampler import DetectedVehicle, InflowSampler, SampleSet, phase_discharge_headways
from ..scheduling.decision import decide_action
from ..scheduling.dispatch import evaluate_solution
from ..scheduling.feasibility import check_solution
from ..scheduling.guided import guided_search_shift
from ..scheduling.problem import ScheduleProblem, Solution, SolveStatus
from ..scheduling.solver import solve
from ..traffic.model import (
    DecisionAction,
    InitialConditions,
    NetworkTopology,
    NodeId,
    SignalTimingPlan,
    Terminate,
)

SAA_TOLERANCE = 1e-6


class ControllerKind(StrEnum):
    UTUS = "UTuS"
    CTUS = "CTuS"
    USUR = "USUR"
    CSUR = "CSUR"

    @property
    def sample_based(self) -> bool:
        return self in (ControllerKind.UTUS, ControllerKind.CTUS)

    @property
    def coordinated(self) -> bool:
        return self in (ControllerKind.CTUS, ControllerKind.CSUR)

    @property
    def baseline(self) -> ControllerKind:
        """The expected-inflow variant with the same coordination setting."""
        return ControllerKind.CSUR if self.coordinated else ControllerKind.USUR


@dataclass(frozen=True)
class ControllerParams:
    sample_count: int = 10
    guided_search: bool = False
    time_limit: float = 5.0
    node_limit: int | None = 4000
    horizon_cycles: int = 3
    merge_threshold: float = 3.0
    horizon_extension: float = 20.0
    resolution: int = 1
    verify: bool = False

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ValueError("Configuration Error: sample_count must be at least 1")
        if self.time_limit <= 0:
            raise ValueError("Configuration Error: time_limit must be positive")
        if self.horizon_cycles < 1:
            raise ValueError("Configuration Error: horizon_cycles must be at least 1")
        if self.resolution < 1:
            raise ValueError("Configuration Error: resolution must be a positive integer")


def controller_label(kind: ControllerKind, sample_count: int, guided_search: bool) -> str:
    """Variant label such as ``CTuS10+gs``; baselines carry no sample count."""
    label = f"{kind.value}{sample_count}" if kind.sample_based else kind.value
    return f"{label}+gs" if guided_search else label


@dataclass
class PlanningStats:
    intersection: NodeId
    solves: int = 0
    optimal: int = 0
    feasible: int = 0
    infeasible: int = 0
    forced_terminations: int = 0
    nodes: int = 0
    solve_time_total: float = 0.0
    solve_time_max: float = 0.0
    warm_accepted: int = 0
    warm_rejected: int = 0
    plan_violations: int = 0
    saa_mismatches: int = 0
    warm_regressions: int = 0

    @property
    def solve_time_mean(self) -> float:
        return self.solve_time_total / self.solves if self.solves else 0.0

    def record(self, solution: Solution, wall: float) -> None:
        self.solves += 1
        match solution.status:
            case SolveStatus.OPTIMAL:
                self.optimal += 1
            case SolveStatus.FEASIBLE:
                self.feasible += 1
            case SolveStatus.INFEASIBLE:
                self.infeasible += 1
        self.nodes += solution.stats.nodes
        self.solve_time_total += wall
        self.solve_time_max = max(self.solve_time_max, wall)


class IntersectionController:
    """Observe, sample, solve and decide for one intersection."""

    def __init__(
        self,
        node: NodeId,
        index: int,
        topology: NetworkTopology,
        kind: ControllerKind,
        params: ControllerParams,
        speed: float,
        headway_per_lane: float,
        episode_seed: int,
    ):
        self.node = node
        self.index = index
        self.topology = topology
        self.kind = kind
        self.params = params
        self.speed = speed
        self.headway_per_lane = headway_per_lane
        self.episode_seed = episode_seed
        self.stats = PlanningStats(node)
        self.last_messages: list[OutflowMessage] = []
        self.previous_plan: SignalTimingPlan | None = None
        cfg = topology.intersections[node]
        self.cfg = cfg
        self.sampler = InflowSampler(
            cfg,
            discharge_headway=phase_discharge_headways(cfg, self.topology, self.headway_per_lane),
            merge_threshold=self.params.merge_threshold,
            resolution=1.0,
        )
        self.local_horizon = {
            road_id: self.topology.road(road_id).length / self.speed for road_id in cfg.entry_roads
        }

    @property
    def sample_count(self) -> int:
        return self.params.sample_count if self.kind.sample_based else 1

    def decide(
        self,
        now: int,
        initial: InitialConditions,
        observation: Sequence[DetectedVehicle],
        inbox: Sequence[OutflowMessage] = (),
    ) -> DecisionAction:
        phase = self.cfg.phase_model[initial.current_phase]
        if initial.elapsed_green >= phase.g_max:
            self.stats.forced_terminations += 1
            return Terminate()

        samples = self._samples(now, observation, inbox)
        problem = ScheduleProblem(
            phase_model=self.cfg.phase_model,
            initial=initial,
            now=now,
            horizon_cycles=self.params.horizon_cycles,
            samples=samples,
        )
        warm = self._warm_start(now, initial)

        started = time.perf_counter()
        solution = solve(problem, self.params.time_limit, warm, self.params.node_limit)
        self.stats.record(solution, time.perf_counter() - started)
        if solution.plan is None:
            logger.warning(f"{self.node}: no plan at t={now} ({solution.diagnostics}); terminating")
            return Terminate()

        if warm is not None:
            if solution.stats.warm_start_used:
                self.stats.warm_accepted += 1
            else:
                self.stats.warm_rejected += 1
        if self.params.verify:
            self._verify(problem, solution)

        self.previous_plan = solution.plan
        if self.kind.coordinated:
            self.last_messages = project_outflows(
                solution, samples, self.topology, self.speed, self.node
            )
        return decide_action(solution, now, self.params.resolution)

    def refresh_messages(self, crossed: Callable[[str], bool]) -> list[OutflowMessage]:
        """Previous messages without the vehicles that have already left this intersection."""
        refreshed = []
        for message in self.last_messages:
            per_sample = tuple(
                tuple(v for v in vehicles if not crossed(v.vehicle_id))
                for vehicles in message.per_sample
            )
            if any(per_sample):
                refreshed.append(
                    OutflowMessage(
                        sender=message.sender,
                        receiver=message.receiver,
                        link=message.link,
                        per_sample=per_sample,
                        sent_at=message.sent_at,
                    )
                )
        self.last_messages = refreshed
        return refreshed

    def _samples(
        self,
        now: int,
        observation: Sequence[DetectedVehicle],
        inbox: Sequence[OutflowMessage],
    ) -> SampleSet:
        extended = None
        if self.kind.coordinated:
            extended = merge_nonlocal(
                observation,
                inbox,
                now,
                self.params.horizon_extension,
                self.local_horizon,
                self.sample_count,
            )
        if not self.kind.sample_based:
            return self.sampler.expected(extended[0] if extended else observation)
        return self.sampler.draw(
            observation,
            self.sample_count,
            [self.episode_seed, self.index, now],
            per_sample_vehicles=extended,
        )

    def _warm_start(self, now: int, initial: InitialConditions) -> SignalTimingPlan | None:
        if not self.params.guided_search or self.previous_plan is None:
            return None
        shifted = guided_search_shift(
            self.previous_plan,
            now - self.previous_plan.decision_time,
            initial,
            self.cfg.phase_model,
        )
        if shifted is None:
            self.stats.warm_rejected += 1
        return shifted

    def _verify(self, problem: ScheduleProblem, solution: Solution) -> None:
        assert solution.plan is not None
        violations = check_solution(problem, solution)
        if violations:
            self.stats.plan_violations += len(violations)
            logger.warning(f"{self.node}: plan at t={problem.now} violates {violations[0]}")
        recomputed = evaluate_solution(solution.plan, solution.schedules, problem.samples)
        if abs(recomputed - solution.objective) > SAA_TOLERANCE:
            self.stats.saa_mismatches += 1
            logger.warning(
                f"{self.node}: objective {solution.objective} != recomputed {recomputed} at t={problem.now}"
            )
        warm_objective = solution.stats.warm_start_objective
        if warm_objective is not None and solution.objective > warm_objective + SAA_TOLERANCE:
            self.stats.warm_regressions += 1
            logger.warning(
                f"{self.node}: incumbent {solution.objective} exceeds warm start {warm_objective}"
            )
