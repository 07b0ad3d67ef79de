"""Tests for environment-driven settings."""

import pytest

from signal_sched.config import AppConfig


class TestAppConfig:
    """Test defaults, environment overrides and derived records."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("SIM_TICK", raising=False)
        monkeypatch.delenv("GENERATION_DURATION", raising=False)
        config = AppConfig(_env_file=None)

        assert config.SIM_TICK == 0.5
        assert config.SOLVER_NODE_LIMIT == 4000
        assert config.STALL_LIMIT == 900.0
        assert config.GENERATION_DURATION is None
        config.validate_for_usage()

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("SAMPLE_COUNT", "25")
        monkeypatch.setenv("solver_time_limit", "1.5")

        config = AppConfig(_env_file=None)

        assert config.SAMPLE_COUNT == 25
        assert config.SOLVER_TIME_LIMIT == 1.5

    @pytest.mark.parametrize(
        "overrides",
        [
            {"STALL_LIMIT": 0},
            {"GENERATION_DURATION": 0},
            {"SWEEP_WORKERS": -1},
            {"SOLVER_NODE_LIMIT": 0},
            {"SIM_TICK": 0},
        ],
    )
    def test_unusable_values(self, overrides):
        with pytest.raises(ValueError, match="Configuration Error"):
            AppConfig(_env_file=None, **overrides).validate_for_usage()

    def test_controller_params_ignore_unset_overrides(self):
        config = AppConfig(_env_file=None, SAMPLE_COUNT=7)

        params = config.controller_params(sample_count=None, guided_search=True)

        assert params.sample_count == 7
        assert params.guided_search is True
        assert params.node_limit == config.SOLVER_NODE_LIMIT

    def test_sim_config(self):
        config = AppConfig(_env_file=None, VEHICLE_SPEED=12.0)

        sim = config.sim_config(seed=3)

        assert sim.seed == 3
        assert sim.speed == 12.0
        assert sim.tick == config.SIM_TICK
        assert config.sim_config(tick=1.0).tick == 1.0
