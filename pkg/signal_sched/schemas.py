"""Versioned schemas for scenario and sweep files."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1


class ScenarioDefaults(BaseModel):
    """Timing and controller defaults a scenario carries into every episode."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    g_min: int = Field(5, gt=0, description="Minimum green in seconds.")
    g_max: int = Field(55, gt=0, description="Maximum green in seconds.")
    intergreen: int = Field(5, gt=0, description="All-red seconds between phases.")
    horizon_cycles: int = Field(3, gt=0)
    horizon_extension: float = Field(20.0, gt=0)
    merge_threshold: float = Field(3.0, gt=0)

    @model_validator(mode="after")
    def _green_bounds(self) -> ScenarioDefaults:
        if self.g_min > self.g_max:
            raise ValueError(f"g_min {self.g_min} exceeds g_max {self.g_max}")
        return self


class RoadSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    length: float = Field(gt=0)
    lanes: int = Field(ge=1)
    from_node: str
    to_node: str


class TurnSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    entry: str
    exit: str
    probability: float = Field(ge=0.0, le=1.0)


class PhaseSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    turns: list[str] = Field(description='Turn movements written as "entry->exit".')
    g_min: int = Field(gt=0)
    g_max: int = Field(gt=0)
    intergreen: int = Field(ge=0)

    @field_validator("turns")
    @classmethod
    def _turn_syntax(cls, v: list[str]) -> list[str]:
        for turn in v:
            entry, sep, exit_road = turn.partition("->")
            if not sep or not entry or not exit_road:
                raise ValueError(f'turn "{turn}" must be written as "entry->exit"')
        return v


class IntersectionSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    entry_roads: list[str]
    exit_roads: list[str]
    phases: list[PhaseSpec] = Field(min_length=1)
    turns: list[TurnSpec]


class ShareRowSpec(BaseModel):
    """Entry-road shares that hold from ``start`` until the next row."""

    model_config = ConfigDict(extra="forbid")

    start: float = Field(ge=0.0)
    shares: dict[str, float]


class DemandSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    total_demand: float = Field(gt=0)
    generation_duration: float = Field(900.0, gt=0)
    profile: list[ShareRowSpec] = Field(min_length=1)

    @field_validator("profile")
    @classmethod
    def _sorted_rows(cls, v: list[ShareRowSpec]) -> list[ShareRowSpec]:
        starts = [row.start for row in v]
        if starts[0] != 0.0:
            raise ValueError("the first demand row must start at 0")
        if starts != sorted(set(starts)):
            raise ValueError("demand rows must have strictly increasing start times")
        return v


class ScenarioFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    name: str
    demand_levels: list[float] = Field(min_length=1)
    defaults: ScenarioDefaults = Field(default_factory=ScenarioDefaults)
    roads: list[RoadSpec] = Field(min_length=1)
    intersections: list[IntersectionSpec] = Field(min_length=1)
    demand: DemandSpec

    @field_validator("demand_levels")
    @classmethod
    def _positive_levels(cls, v: list[float]) -> list[float]:
        if any(level <= 0 for level in v):
            raise ValueError("demand levels must be positive")
        return v


class SweepFile(BaseModel):
    """A sweep matrix; unset fields fall back to the scenario and settings defaults."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    scenario: str = Field(description="Built-in scenario name or a scenario file path.")
    controllers: list[Literal["UTuS", "CTuS", "USUR", "CSUR"]] = Field(
        default_factory=lambda: ["UTuS", "CTuS", "USUR", "CSUR"], min_length=1
    )
    levels: list[float] | None = None
    sample_counts: list[int] = Field(default_factory=lambda: [10], min_length=1)
    guided_search: Literal["off", "on", "both"] = "off"
    seeds: list[int] = Field(default_factory=lambda: list(range(20)), min_length=1)
    solver_time_limit: float | None = Field(None, gt=0)
    node_limit: int | None = Field(None, ge=1)
    horizon_extensions: list[float] | None = None
    tick: float | None = Field(None, gt=0)
    generation_duration: float | None = Field(None, gt=0)
    stall_limit: float | None = Field(None, gt=0)
    verify: bool = False
    defaults: dict[str, float] = Field(
        default_factory=dict, description="Overrides for the scenario defaults."
    )

    @field_validator("sample_counts")
    @classmethod
    def _positive_samples(cls, v: list[int]) -> list[int]:
        if any(count < 1 for count in v):
            raise ValueError("sample counts must be at least 1")
        return v

    @field_validator("defaults")
    @classmethod
    def _known_defaults(cls, v: dict[str, float]) -> dict[str, float]:
        unknown = set(v) - set(ScenarioDefaults.model_fields)
        if unknown:
            raise ValueError(f"unknown scenario defaults: {', '.join(sorted(unknown))}")
        return v
