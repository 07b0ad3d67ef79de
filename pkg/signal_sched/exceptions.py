"""Exception hierarchy for the signal scheduling testbed."""

from typing import Any


class SignalSchedError(Exception):
    """Base class for all errors raised by signal_sched."""


class TurnNotPermittedError(SignalSchedError, KeyError):
    """A turn movement is not served by any phase of the intersection."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class MissingTurnRowError(SignalSchedError, KeyError):
    """An entry road has no turn-probability row in the intersection config."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DanglingFragmentError(SignalSchedError, KeyError):
    """A schedule fragment references a cluster absent from the samples."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class OracleTooLargeError(SignalSchedError, ValueError):
    """The exhaustive plan enumeration exceeds its size bound."""


class SampleCountMismatchError(SignalSchedError, ValueError):
    """A received outflow message carries a different sample count."""


class UnknownScenarioError(SignalSchedError, ValueError):
    """The requested built-in scenario does not exist."""


class ScenarioFileError(SignalSchedError, ValueError):
    """A scenario or sweep file could not be read or failed schema validation."""


class SimulationStalledError(SignalSchedError):
    """No vehicle left the network for longer than the configured stall limit."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
