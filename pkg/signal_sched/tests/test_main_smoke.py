"""Smoke tests for the command-line interface."""

import subprocess
import sys
from pathlib import Path
from unittest.mock import patch

import pytest
from loguru import logger
from typer.testing import CliRunner

from signal_sched import main
from signal_sched.exceptions import SimulationStalledError
from signal_sched.experiments.config_loader import dump_scenario_yaml
from signal_sched.main import app, load_run_scenario

runner = CliRunner()


def test_help_command_works() -> None:
    """The CLI imports and prints help without touching stderr."""
    repo_root = Path(__file__).parent.parent.parent

    result = subprocess.run(
        [sys.executable, "-m", "signal_sched.main", "--help"],
        cwd=repo_root,
        capture_output=True,
        text=True,
        timeout=30,
    )

    assert result.returncode == 0, f"Help command failed with: {result.stderr}"
    assert "Usage:" in result.stdout or "usage:" in result.stdout.lower()
    assert "--help" in result.stdout
    assert result.stderr == "", f"Unexpected stderr: {result.stderr}"


def test_import_main_module() -> None:
    try:
        from signal_sched import main

        assert hasattr(main, "app")
    except ImportError as e:
        pytest.fail(f"Failed to import main module: {e}")


class TestCommands:
    """Test the commands that finish without running an episode."""

    def test_scenario_to_stdout(self):
        result = runner.invoke(app, ["scenario", "isolated"])

        assert result.exit_code == 0
        assert "name: isolated" in result.stdout

    def test_scenario_to_file(self, temp_dir):
        path = temp_dir / "grid.yaml"

        result = runner.invoke(app, ["scenario", "grid_5x5", "-o", str(path)])

        assert result.exit_code == 0
        assert path.read_text(encoding="utf-8").startswith("schema_version: 1")

    def test_validate_builtin(self):
        assert runner.invoke(app, ["validate", "arterial_1x5"]).exit_code == 0

    def test_validate_unknown(self):
        result = runner.invoke(app, ["validate", "bogus"])

        assert result.exit_code == 1
        assert "Scenario Error" in result.stdout


@pytest.fixture
def scenario_file(short_isolated, temp_dir):
    """The isolated intersection with one minute of demand, as a YAML file."""
    path = temp_dir / "short.yaml"
    path.write_text(dump_scenario_yaml(short_isolated), encoding="utf-8")
    return path


@pytest.fixture
def run_dir(temp_dir):
    yield temp_dir / "out"
    logger.remove()


class TestRunCommand:
    """Test how the run command resolves its scenario and parameters."""

    def test_scenario_keeps_its_generation_duration(self, scenario_file):
        assert load_run_scenario(str(scenario_file), None).demand.generation_duration == 60.0
        assert load_run_scenario(str(scenario_file), 15.0).demand.generation_duration == 15.0

    def test_file_generation_duration_reaches_route_generation(self, scenario_file, run_dir):
        with patch("signal_sched.main.generate_routes", side_effect=ValueError("stop")) as routes:
            result = runner.invoke(
                app, ["run", "--scenario", str(scenario_file), "--out", str(run_dir)]
            )

        assert result.exit_code == 1
        assert "Episode Error" in result.stdout
        assert routes.call_args.args[1].generation_duration == 60.0

    def test_generation_duration_flag(self, scenario_file, run_dir):
        with patch("signal_sched.main.generate_routes", side_effect=ValueError("stop")) as routes:
            runner.invoke(
                app,
                [
                    "run",
                    "--scenario",
                    str(scenario_file),
                    "--generation-duration",
                    "20",
                    "--out",
                    str(run_dir),
                ],
            )

        assert routes.call_args.args[1].generation_duration == 20.0

    def test_zero_horizon_extension_is_kept(self, run_dir):
        with (
            patch("signal_sched.main.generate_routes", return_value=[]),
            patch(
                "signal_sched.main.run_episode", side_effect=SimulationStalledError("stuck")
            ) as episode,
        ):
            result = runner.invoke(
                app, ["run", "--horizon-extension", "0", "--out", str(run_dir)]
            )

        assert result.exit_code == 1
        assert episode.call_args.args[3].horizon_extension == 0.0

    def test_scenario_default_horizon_extension(self, run_dir):
        with (
            patch("signal_sched.main.generate_routes", return_value=[]),
            patch(
                "signal_sched.main.run_episode", side_effect=SimulationStalledError("stuck")
            ) as episode,
        ):
            runner.invoke(app, ["run", "--out", str(run_dir)])

        assert episode.call_args.args[3].horizon_extension == 20.0


class TestSweepCommand:
    """Test the sweep matrix the command builds from a sweep file."""

    def test_config_path_carries_stall_limit(self, temp_dir, run_dir):
        config = temp_dir / "sweep.yaml"
        config.write_text("scenario: isolated\ncontrollers: [USUR]\nseeds: [0]\n", encoding="utf-8")

        with (
            patch.object(main.settings, "STALL_LIMIT", 123.0),
            patch("signal_sched.main.run_sweep", side_effect=OSError("stop")) as sweep,
        ):
            result = runner.invoke(
                app, ["sweep", "--config", str(config), "--out", str(run_dir)]
            )

        assert result.exit_code == 1
        spec = sweep.call_args.args[0]
        assert spec.stall_limit == 123.0
        assert spec.generation_duration is None

    def test_file_stall_limit_wins(self, temp_dir, run_dir):
        config = temp_dir / "sweep.yaml"
        config.write_text("scenario: isolated\nstall_limit: 300\n", encoding="utf-8")

        with patch("signal_sched.main.run_sweep", side_effect=OSError("stop")) as sweep:
            runner.invoke(app, ["sweep", "--config", str(config), "--out", str(run_dir)])

        assert sweep.call_args.args[0].stall_limit == 300.0
