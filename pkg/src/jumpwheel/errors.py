"""Exception types raised by the simulator."""

from __future__ import annotations


class JumpwheelError(Exception):
    """Base class for all simulator errors."""


class ParameterError(JumpwheelError, ValueError):
    """A parameter or configuration value is invalid.

    ``key`` names the offending field (dotted path for config blocks).
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class ModelDegeneracyError(JumpwheelError):
    """The mass matrix is singular to working precision."""


class NumericalDivergenceError(JumpwheelError):
    """Integration produced a non-finite state.

    ``last_state`` is the last state that was fully finite.
    """

    def __init__(self, message: str, last_state):
        super().__init__(message)
        self.last_state = last_state


class RunawayChatterError(JumpwheelError):
    """More phase-transition events occurred than ``SimConfig.max_events`` allows."""


class DegenerateSegmentError(JumpwheelError):
    """A flight segment contains too few samples to be measured."""
