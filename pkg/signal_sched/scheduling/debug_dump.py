"""Line-oriented text dump of schedule problems and solutions.

Problem format, one record per line::

    problem now=120 horizon=3 phase=0 elapsed=4
    phase 0 g_min=5 g_max=55 intergreen=5 turns=n_in->s_out,s_in->n_out
    sample 0
    cluster 0 count=3.0 arrival=121.0 length=8.0
    end

Cluster compositions are not written; they do not affect scheduling.
"""

from collections.abc import Iterator

from ..sampling.sampler import SampleSet
from ..traffic.model import (
    Cluster,
    InflowSample,
    InitialConditions,
    Phase,
    PhaseModel,
    TurnMovement,
)
from .problem import ScheduleProblem, Solution


def _fields(tokens: list[str], line_number: int) -> dict[str, str]:
    fields: dict[str, str] = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"Debug dump line {line_number}: expected key=value, got {token!r}")
        fields[key] = value
    return fields


def format_problem(problem: ScheduleProblem) -> str:
    lines = [
        f"problem now={problem.now} horizon={problem.horizon_cycles} "
        f"phase={problem.initial.current_phase} elapsed={problem.initial.elapsed_green}"
    ]
    for k, phase in enumerate(problem.phase_model):
        turns = ",".join(str(turn) for turn in sorted(phase.turns))
        lines.append(
            f"phase {k} g_min={phase.g_min} g_max={phase.g_max} "
            f"intergreen={phase.intergreen} turns={turns}"
        )
    for s, sample in enumerate(problem.samples.samples):
        lines.append(f"sample {s}")
        for k, clusters in enumerate(sample.per_phase):
            lines.extend(
                f"cluster {k} count={c.count!r} arrival={c.arrival!r} length={c.length!r}"
                for c in clusters
            )
    lines.append("end")
    return "\n".join(lines) + "\n"


def _records(text: str) -> Iterator[tuple[int, str, list[str]]]:
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        yield line_number, head, rest


def parse_problem(text: str) -> ScheduleProblem:
    """Inverse of :func:`format_problem`."""
    header: dict[str, str] | None = None
    phases: list[Phase] = []
    samples: list[list[list[Cluster]]] = []
    ended = False

    for line_number, head, rest in _records(text):
        if ended:
            raise ValueError(f"Debug dump line {line_number}: content after 'end'")
        if head == "problem":
            header = _fields(rest, line_number)
        elif head == "phase":
            fields = _fields(rest[1:], line_number)
            turns = frozenset(
                TurnMovement(*item.split("->", 1))
                for item in fields.get("turns", "").split(",")
                if item
            )
            phases.append(
                Phase(
                    turns=turns,
                    g_min=int(fields["g_min"]),
                    g_max=int(fields["g_max"]),
                    intergreen=int(fields["intergreen"]),
                )
            )
        elif head == "sample":
            samples.append([[] for _ in phases])
        elif head == "cluster":
            if not samples:
                raise ValueError(f"Debug dump line {line_number}: cluster before any sample")
            k = int(rest[0])
            fields = _fields(rest[1:], line_number)
            samples[-1][k].append(
                Cluster(
                    count=float(fields["count"]),
                    arrival=float(fields["arrival"]),
                    length=float(fields["length"]),
                )
            )
        elif head == "end":
            ended = True
        else:
            raise ValueError(f"Debug dump line {line_number}: unknown record {head!r}")

    if header is None:
        raise ValueError("Debug dump has no 'problem' header")
    return ScheduleProblem(
        phase_model=PhaseModel(phases=tuple(phases)),
        initial=InitialConditions(
            current_phase=int(header["phase"]), elapsed_green=int(header["elapsed"])
        ),
        now=int(header["now"]),
        horizon_cycles=int(header["horizon"]),
        samples=SampleSet(
            samples=tuple(
                InflowSample(per_phase=tuple(tuple(c) for c in per_phase))
                for per_phase in samples
            )
        ),
    )


def format_solution(solution: Solution) -> str:
    lines = [
        f"solution status={solution.status.value} objective={solution.objective!r} "
        f"nodes={solution.stats.nodes}"
    ]
    if solution.plan is not None:
        lines.extend(
            f"interval {iv.phase} {iv.cycle} start={iv.start} end={iv.end}"
            for iv in solution.plan.intervals
        )
    for (s, k, q, r), fragment in sorted(solution.schedules.fragments.items()):
        lines.append(
            f"fragment {s} {k} {q} {r} start={fragment.start!r} length={fragment.length!r}"
        )
    if solution.diagnostics:
        lines.append(f"# {solution.diagnostics}")
    lines.append("end")
    return "\n".join(lines) + "\n"
