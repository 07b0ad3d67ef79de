from __future__ import annotations

from dataclasses import replace
from typing import Any, Literal

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

from .simulation.controller import ControllerParams
from .simulation.routes import SimConfig

load_dotenv()


class AppConfig(BaseSettings):
    """
    Testbed configuration, loaded from environment variables or a .env file.
    Scenario and sweep files override these defaults per run.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Simulator kinematics
    SIM_TICK: float = 0.5
    VEHICLE_SPEED: float = 10.0
    VEHICLE_LENGTH: float = 5.0
    QUEUE_GAP: float = 2.0
    STARTUP_LOST_TIME: float = 3.5
    SATURATION_HEADWAY_PER_LANE: float = 2.5

    # Controller
    CONTROLLER_RESOLUTION: int = 1
    MERGE_THRESHOLD: float = 3.0
    HORIZON_CYCLES: int = 3
    HORIZON_EXTENSION: float = 20.0
    SAMPLE_COUNT: int = 10

    # Solver
    SOLVER_TIME_LIMIT: float = 5.0
    SOLVER_NODE_LIMIT: int | None = 4000

    STALL_LIMIT: float = 900.0
    # Unset keeps each scenario's own demand length
    GENERATION_DURATION: float | None = None

    SWEEP_WORKERS: int = 0  # 0 picks 80% of the CPU cores
    OUTPUT_DIR: str = "results"
    LOG_LEVEL: Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR"] = "INFO"
    RUN_LOG_LEVEL: Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR"] = "DEBUG"

    def validate_for_usage(self) -> None:
        """Raise on values no episode can run with."""
        if self.STALL_LIMIT <= 0:
            raise ValueError("Configuration Error: STALL_LIMIT must be positive.")
        if self.GENERATION_DURATION is not None and self.GENERATION_DURATION <= 0:
            raise ValueError("Configuration Error: GENERATION_DURATION must be positive.")
        if self.SWEEP_WORKERS < 0:
            raise ValueError("Configuration Error: SWEEP_WORKERS must be 0 or positive.")
        if self.SOLVER_NODE_LIMIT is not None and self.SOLVER_NODE_LIMIT < 1:
            raise ValueError("Configuration Error: SOLVER_NODE_LIMIT must be at least 1.")
        # Both records validate their own fields.
        self.sim_config()
        self.controller_params()

    def sim_config(self, seed: int = 0, tick: float | None = None) -> SimConfig:
        return SimConfig(
            tick=tick if tick is not None else self.SIM_TICK,
            speed=self.VEHICLE_SPEED,
            vehicle_length=self.VEHICLE_LENGTH,
            queue_gap=self.QUEUE_GAP,
            startup_lost_time=self.STARTUP_LOST_TIME,
            saturation_headway_per_lane=self.SATURATION_HEADWAY_PER_LANE,
            seed=seed,
        )

    def controller_params(self, **overrides: Any) -> ControllerParams:
        """Controller parameters from settings; ``None`` overrides are ignored."""
        params = ControllerParams(
            sample_count=self.SAMPLE_COUNT,
            time_limit=self.SOLVER_TIME_LIMIT,
            node_limit=self.SOLVER_NODE_LIMIT,
            horizon_cycles=self.HORIZON_CYCLES,
            merge_threshold=self.MERGE_THRESHOLD,
            horizon_extension=self.HORIZON_EXTENSION,
            resolution=self.CONTROLLER_RESOLUTION,
        )
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(params, **changes) if changes else params


settings = AppConfig()
