"""Network load, search effort and resident memory of one episode, for the run log."""

from __future__ import annotations

from dataclasses import dataclass

import psutil
from loguru import logger

from ..traffic.model import RoadId
from .world import World

MB = 1024 * 1024
RSS_GROWTH_WARNING = 200 * MB


@dataclass
class EpisodeLoad:
    """Peaks reached during one episode."""

    peak_in_network: int = 0
    peak_queue: int = 0
    peak_queue_road: RoadId = ""
    peak_round_nodes: int = 0
    peak_round_time: int = 0
    rss_start: int = 0
    rss_peak: int = 0

    @property
    def rss_growth(self) -> int:
        return self.rss_peak - self.rss_start


class EpisodeMonitor:
    """Follows queue lengths every tick and search nodes every decision round.

    A progress line goes to the debug log every ``log_interval`` simulated
    seconds; the peaks are logged once when the episode finishes.
    """

    def __init__(self, log_interval: int = 60):
        if log_interval < 1:
            raise ValueError("log_interval must be at least 1 second")
        self.log_interval = log_interval
        self._process = psutil.Process()
        rss = self._rss()
        self.load = EpisodeLoad(rss_start=rss, rss_peak=rss)
        self._nodes_seen = 0

    def _rss(self) -> int:
        return int(self._process.memory_info().rss)

    def after_tick(self, world: World) -> None:
        load = self.load
        load.peak_in_network = max(load.peak_in_network, world.in_network())
        for road_id, length in world.queue_lengths().items():
            if length > load.peak_queue:
                load.peak_queue = length
                load.peak_queue_road = road_id

    def after_round(self, now: int, world: World, nodes_total: int) -> None:
        """Record the nodes explored by every solve of the round at ``now``."""
        nodes = nodes_total - self._nodes_seen
        self._nodes_seen = nodes_total
        if nodes > self.load.peak_round_nodes:
            self.load.peak_round_nodes = nodes
            self.load.peak_round_time = now
        if now % self.log_interval == 0:
            rss = self._rss()
            self.load.rss_peak = max(self.load.rss_peak, rss)
            logger.debug(
                f"t={now}: {world.in_network()} vehicle(s) in network, "
                f"{world.vehicles_out} out, {nodes} node(s) this round, RSS {rss / MB:.1f}MB"
            )

    def finish(self) -> EpisodeLoad:
        load = self.load
        load.rss_peak = max(load.rss_peak, self._rss())
        logger.debug(
            f"Episode load: peak {load.peak_in_network} vehicle(s) in network, "
            f"longest queue {load.peak_queue} on {load.peak_queue_road or '-'}, "
            f"{load.peak_round_nodes} node(s) in the busiest round (t={load.peak_round_time})"
        )
        if load.rss_growth > RSS_GROWTH_WARNING:
            logger.warning(f"Resident memory grew by {load.rss_growth / MB:.1f}MB during the episode")
        return load
