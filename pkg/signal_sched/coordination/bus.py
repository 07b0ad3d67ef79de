"""In-process message bus with a synchronous round barrier."""

import json
from collections.abc import Iterable
from pathlib import Path
from typing import TextIO

from loguru import logger

from ..traffic.model import NodeId, RoadId
from .messages import OutflowMessage, ProjectedVehicle


class MessageBus:
    """Collects outflow messages during a round and delivers them at the barrier.

    Messages published in round ``n`` become readable in round ``n + 1``. Only
    the latest message per (sender, link) of a round is delivered.
    """

    def __init__(self, log_path: Path | None = None):
        self.round = 0
        self._pending: dict[tuple[NodeId, RoadId], OutflowMessage] = {}
        self._delivered: dict[NodeId, list[OutflowMessage]] = {}
        self._log_path = log_path
        self._log: TextIO | None = None
        if log_path is not None:
            log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log = log_path.open("w", encoding="utf-8")

    def publish(self, messages: Iterable[OutflowMessage]) -> None:
        for message in messages:
            self._pending[(message.sender, message.link)] = message

    def barrier(self) -> int:
        """Close the current round; returns the number of messages delivered."""
        delivered: dict[NodeId, list[OutflowMessage]] = {}
        for key in sorted(self._pending):
            message = self._pending[key]
            delivered.setdefault(message.receiver, []).append(message)
            if self._log is not None:
                record = {"round": self.round, **message.to_record()}
                self._log.write(json.dumps(record, separators=(",", ":")) + "\n")
        count = len(self._pending)
        self._delivered = delivered
        self._pending = {}
        self.round += 1
        return count

    def inbox(self, receiver: NodeId) -> list[OutflowMessage]:
        return list(self._delivered.get(receiver, []))

    def close(self) -> None:
        if self._log is not None:
            self._log.close()
            self._log = None
            logger.debug(f"Message log written to {self._log_path}")

    def __enter__(self) -> "MessageBus":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def read_message_log(path: Path) -> list[tuple[int, OutflowMessage]]:
    """Replay a message log written by :class:`MessageBus`."""
    entries: list[tuple[int, OutflowMessage]] = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            message = OutflowMessage(
                sender=record["sender"],
                receiver=record["receiver"],
                link=record["link"],
                per_sample=tuple(
                    tuple(ProjectedVehicle(v[0], float(v[1]), float(v[2])) for v in vehicles)
                    for vehicles in record["per_sample"]
                ),
                sent_at=int(record["sent_at"]),
            )
            entries.append((int(record["round"]), message))
    return entries
