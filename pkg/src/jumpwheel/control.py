"""Reference profiles for the relative pendulum speed and the torque controller."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ParameterError
from .model import SimState

RAMP = "ramp"
CONSTANT = "constant"


@dataclass(frozen=True)
class Segment:
    """One piece of a reference profile on ``[t_start, t_end)``.

    For ``kind="ramp"`` the output is ``start_value + value * (t - t_start)``
    (``value`` is the slope, rad/s^2); for ``kind="constant"`` it is ``value``.
    """

    t_start: float
    t_end: float
    kind: str
    value: float
    start_value: float = 0.0

    def __call__(self, t: float) -> float:
        if self.kind == RAMP:
            return self.start_value + self.value * (t - self.t_start)
        return self.value


class ReferenceProfile:
    """Piecewise schedule of the relative angular velocity reference.

    Segments must be contiguous and start at ``t = 0``.  Boundary instants
    belong to the later segment; past the last ``t_end`` the final value is
    held.
    """

    def __init__(self, segments: Iterable[Segment]):
        segs = tuple(segments)
        if not segs:
            raise ParameterError("profile.segments", "at least one segment is required")
        if segs[0].t_start != 0.0:
            raise ParameterError("profile.segments.0.t_start", "first segment must start at t=0")
        for i, seg in enumerate(segs):
            if seg.kind not in (RAMP, CONSTANT):
                raise ParameterError(f"profile.segments.{i}.kind", f"unknown kind {seg.kind!r}")
            if not seg.t_end > seg.t_start:
                raise ParameterError(f"profile.segments.{i}.t_end", "must exceed t_start")
            if not (math.isfinite(seg.value) and math.isfinite(seg.start_value)):
                raise ParameterError(f"profile.segments.{i}.value", "must be finite")
            if i and seg.t_start != segs[i - 1].t_end:
                raise ParameterError(f"profile.segments.{i}.t_start", "segments must be contiguous")
            if i < len(segs) - 1 and not math.isfinite(seg.t_end):
                raise ParameterError(f"profile.segments.{i}.t_end", "only the last segment may be open-ended")
        self.segments = segs
        self._starts = [s.t_start for s in segs]
        last = segs[-1]
        self._terminal = last(last.t_end) if math.isfinite(last.t_end) else None

    def __call__(self, t: float) -> float:
        return eval_reference(self, t)

    def __eq__(self, other):
        return isinstance(other, ReferenceProfile) and self.segments == other.segments

    def __repr__(self):
        return f"ReferenceProfile({list(self.segments)!r})"

    def piece_at(self, t: float) -> Segment:
        """The segment formula in effect at ``t`` (right-continuous).

        Evaluating it slightly past the segment's end extends the formula,
        which is what an integrator needs for the last stage of a step that
        ends on a breakpoint.
        """
        last = self.segments[-1]
        if self._terminal is not None and t >= last.t_end:
            return Segment(last.t_end, math.inf, CONSTANT, self._terminal)
        return self.segments[max(bisect.bisect_right(self._starts, t) - 1, 0)]

    def breakpoints(self) -> list[float]:
        """Interior instants where the reference may be discontinuous."""
        pts = [s.t_start for s in self.segments[1:]]
        if self._terminal is not None:
            pts.append(self.segments[-1].t_end)
        return pts


def eval_reference(profile: ReferenceProfile, t: float) -> float:
    """Reference ``psi_dot_ref(t)`` in rad/s (right-continuous at breakpoints)."""
    if t < 0:
        raise ValueError(f"reference is defined for t >= 0, got {t}")
    return profile.piece_at(t)(t)


def builtin_profiles() -> dict[str, ReferenceProfile]:
    """The two open-loop commands used in the experiments.

    ``vertical``: ramp at -2 rad/s^2 for 5 s, a 0.2 s swing-up at -40 rad/s,
    then a 200 rad/s spike.  ``horizontal``: ramp at -6.22 rad/s^2 for 3.75 s,
    then -150 rad/s held.  Negative values roll the wheel toward +x.
    """
    inf = math.inf
    return {
        "vertical": ReferenceProfile(
            [
                Segment(0.0, 5.0, RAMP, -2.0),
                Segment(5.0, 5.2, CONSTANT, -40.0),
                Segment(5.2, inf, CONSTANT, 200.0),
            ]
        ),
        "horizontal": ReferenceProfile(
            [
                Segment(0.0, 3.75, RAMP, -6.22),
                Segment(3.75, 4.75, CONSTANT, -150.0),
            ]
        ),
    }


@dataclass(frozen=True)
class ControllerConfig:
    """Proportional speed controller on the relative pendulum velocity.

    The gain is calibrated so that the vertical command reproduces the
    reported first-hop height; with ``saturation_enabled`` the torque is
    clipped at the motor limit.
    """

    kp: float = 0.03
    tau_max: float = 0.376
    saturation_enabled: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.kp) and self.kp > 0):
            raise ParameterError("kp", f"must be finite and > 0, got {self.kp!r}")
        if not (math.isfinite(self.tau_max) and self.tau_max > 0):
            raise ParameterError("tau_max", f"must be finite and > 0, got {self.tau_max!r}")


def control_torque(cfg: ControllerConfig, psi_dot_ref: float, state: SimState) -> float:
    """Motor torque ``kp * (psi_dot_ref - psi_dot)``, optionally saturated."""
    tau = cfg.kp * (psi_dot_ref - state.psi_dot)
    if cfg.saturation_enabled:
        tau = min(max(tau, -cfg.tau_max), cfg.tau_max)
    return tau
