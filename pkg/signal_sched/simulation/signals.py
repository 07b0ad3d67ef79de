"""Signal-head state machine and the per-tick signal trace."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum

from ..traffic.model import (
    DecisionAction,
    Extend,
    NetworkTopology,
    NodeId,
    PhaseModel,
    Terminate,
)
from ..traffic.validation import Violation


class SignalState(StrEnum):
    GREEN = "green"
    ALL_RED = "all_red"


@dataclass(frozen=True)
class TraceRow:
    time: float
    intersection: NodeId
    phase: int
    state: SignalState


class SignalHead:
    """Green/all-red cycle of one intersection, driven by controller actions."""

    def __init__(self, intersection_id: NodeId, phase_model: PhaseModel, start: int = 0):
        self.intersection_id = intersection_id
        self.phase_model = phase_model
        self.phase = 0
        self.state = SignalState.GREEN
        self.green_start = start
        self.red_until = start
        self.next_decision = start

    def elapsed_green(self, now: int) -> int:
        return now - self.green_start

    def is_green(self, phase: int) -> bool:
        return self.state is SignalState.GREEN and self.phase == phase

    def advance(self, now: int) -> bool:
        """End an expired all-red; returns True when a new green begins."""
        if self.state is SignalState.ALL_RED and now >= self.red_until:
            self.phase = (self.phase + 1) % len(self.phase_model)
            self.state = SignalState.GREEN
            self.green_start = self.red_until
            self.next_decision = self.red_until
            return True
        return False

    def apply(self, action: DecisionAction, now: int) -> None:
        if self.state is not SignalState.GREEN:
            raise RuntimeError(f"{self.intersection_id}: decision outside green at t={now}")
        match action:
            case Extend(duration=duration):
                if duration <= 0:
                    raise ValueError("Extend duration must be positive")
                self.next_decision = now + duration
            case Terminate():
                self.state = SignalState.ALL_RED
                self.red_until = now + self.phase_model[self.phase].intergreen
                self.next_decision = self.red_until

    def trace_row(self, time: float) -> TraceRow:
        return TraceRow(time, self.intersection_id, self.phase, self.state)


def check_signal_trace(
    trace: Iterable[TraceRow], topology: NetworkTopology, tick: float
) -> list[Violation]:
    """Green runs within bounds, exact all-red between phases, phases in cycle order.

    The last run of every intersection is truncated by the end of the episode
    and only its upper bound is checked.
    """
    by_node: dict[NodeId, list[TraceRow]] = {}
    for row in trace:
        by_node.setdefault(row.intersection, []).append(row)

    found: list[Violation] = []
    for node in sorted(by_node):
        pm = topology.intersections[node].phase_model
        runs = _runs(by_node[node], tick)
        for index, (phase, state, duration) in enumerate(runs):
            complete = index < len(runs) - 1
            entity = f"{node}:{phase}@{index}"
            if state == SignalState.GREEN:
                bounds = pm[phase]
                if duration > bounds.g_max + 1e-9 or (complete and duration < bounds.g_min - 1e-9):
                    found.append(
                        Violation(
                            entity,
                            "signal.green_bounds",
                            f"green lasted {duration:g}s outside [{bounds.g_min}, {bounds.g_max}]",
                        )
                    )
            elif complete and abs(duration - pm[phase].intergreen) > 1e-9:
                found.append(
                    Violation(
                        entity,
                        "signal.intergreen",
                        f"all-red lasted {duration:g}s, expected {pm[phase].intergreen}",
                    )
                )
            if index > 0:
                previous_phase, previous_state, _ = runs[index - 1]
                expected = (
                    (previous_phase + 1) % len(pm)
                    if previous_state == SignalState.ALL_RED
                    else previous_phase
                )
                if state == previous_state or phase != expected:
                    found.append(Violation(entity, "signal.order", "phase served out of order"))
    return found


def _runs(rows: Sequence[TraceRow], tick: float) -> list[tuple[int, SignalState, float]]:
    runs: list[tuple[int, SignalState, float]] = []
    for row in sorted(rows, key=lambda r: r.time):
        if runs and runs[-1][0] == row.phase and runs[-1][1] == row.state:
            phase, state, duration = runs[-1]
            runs[-1] = (phase, state, duration + tick)
        else:
            runs.append((row.phase, row.state, tick))
    return runs
