"""Tests for the per-episode load monitor."""

from unittest.mock import patch

import pytest
from loguru import logger

from signal_sched.simulation.monitor import MB, EpisodeMonitor
from signal_sched.simulation.routes import SimConfig, SimVehicle
from signal_sched.simulation.world import World


@pytest.fixture
def log_messages():
    messages: list[str] = []
    sink = logger.add(messages.append, level="DEBUG", format="{level}|{message}")
    yield messages
    logger.remove(sink)


class TestEpisodeMonitor:
    """Test the peaks tracked over ticks and decision rounds."""

    def test_longest_queue_on_the_red_approach(self, isolated_scenario):
        vehicles = [SimVehicle(f"v{i}", ("W_I", "I_E"), float(i)) for i in range(3)]
        world = World(isolated_scenario.topology, vehicles, SimConfig())
        monitor = EpisodeMonitor()

        for _ in range(100):
            world.step(0.5)
            monitor.after_tick(world)

        assert world.queue_lengths()["W_I"] == 3
        assert monitor.load.peak_queue == 3
        assert monitor.load.peak_queue_road == "W_I"
        assert monitor.load.peak_in_network == 3

    def test_busiest_round(self, isolated_scenario):
        world = World(isolated_scenario.topology, [], SimConfig())
        monitor = EpisodeMonitor(log_interval=10)

        for now, total in ((0, 40), (1, 40), (2, 190), (3, 200)):
            monitor.after_round(now, world, total)

        assert monitor.load.peak_round_nodes == 150
        assert monitor.load.peak_round_time == 2

    def test_progress_and_summary_lines(self, isolated_scenario, log_messages):
        world = World(isolated_scenario.topology, [], SimConfig())
        monitor = EpisodeMonitor(log_interval=2)

        for now in range(5):
            monitor.after_round(now, world, 0)
        load = monitor.finish()

        progress = [m for m in log_messages if m.startswith("DEBUG|t=")]
        assert [m.split(":")[0] for m in progress] == ["DEBUG|t=0", "DEBUG|t=2", "DEBUG|t=4"]
        assert any(m.startswith("DEBUG|Episode load: peak 0") for m in log_messages)
        assert load.rss_peak >= load.rss_start > 0

    def test_memory_growth_warning(self, log_messages):
        monitor = EpisodeMonitor()
        grown = monitor.load.rss_start + 300 * MB

        with patch.object(monitor, "_rss", return_value=grown):
            load = monitor.finish()

        assert load.rss_growth == 300 * MB
        assert any(m.startswith("WARNING|Resident memory grew by 300.0MB") for m in log_messages)

    def test_interval_must_be_positive(self):
        with pytest.raises(ValueError, match="log_interval"):
            EpisodeMonitor(log_interval=0)
