"""Hybrid rolling/flight integration with event localization.

The phase machine is ``ROLLING -> (takeoff) -> FLIGHT -> (landing) -> LANDED``.
Each phase is integrated with fixed-step classical RK4.  Steps are clipped so
they never straddle a breakpoint of the reference profile, and events are
localized by bisection on the sub-step length, so every RK4 step sees a
smooth vector field.

Landing ends the run: no impact model is included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .control import ControllerConfig, ReferenceProfile, control_torque
from .errors import NumericalDivergenceError, ParameterError, RunawayChatterError
from .model import (
    Accelerations,
    ConstraintForces,
    Phase,
    RobotParams,
    SimState,
    com_kinematics,
    constraint_forces,
    flight_dynamics,
    rolling_dynamics,
    total_energy,
)

COLUMNS = (
    "t", "phase", "phi", "theta", "x", "y", "dphi", "dtheta", "dx", "dy",
    "tau", "lambda1", "lambda2", "x_com", "y_com", "e_kin", "e_pot", "slip_flag",
)  # fmt: skip


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    t_end: float = 8.0
    event_time_tol: float = 1e-10
    constraint_tol: float = 1e-3
    max_events: int = 10

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError("dt", f"must be finite and > 0, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ParameterError("t_end", f"must be finite and > 0, got {self.t_end!r}")
        if not (0 < self.event_time_tol < self.dt):
            raise ParameterError("event_time_tol", "must satisfy 0 < event_time_tol < dt")
        if not self.constraint_tol > 0:
            raise ParameterError("constraint_tol", "must be > 0")
        if self.max_events < 0:
            raise ParameterError("max_events", "must be >= 0")


class EventKind(str, Enum):
    TAKEOFF = "takeoff"
    DETACHMENT = "non-jump detachment"
    LANDING = "landing"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    state: SimState


@dataclass
class TrajectoryRecord:
    """Sampled trajectory of one run.

    ``data`` has one row per recorded instant and the columns in ``COLUMNS``;
    ``work`` holds the accumulated actuator work at the same instants.
    """

    data: np.ndarray
    work: np.ndarray
    events: list[Event] = field(default_factory=list)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def __len__(self) -> int:
        return len(self.data)

    @property
    def final_phase(self) -> Phase:
        return Phase(int(self.data[-1, 1]))

    def flight_segments(self) -> list[tuple[Event, Event | None]]:
        """``(release, landing)`` event pairs; landing is None if the run hit ``t_end``.

        A run that starts airborne gets a synthetic release at its first row.
        """
        segments = []
        pending = None
        if len(self.data) and int(self.data[0, 1]) != Phase.ROLLING:
            row = self.data[0]
            state = SimState.from_vector(row[0], row[2:10], Phase.FLIGHT)
            k = math.hypot(row[4] - row[13], row[5] - row[14])
            dy_com = state.dy + k * state.dtheta * math.sin(state.theta)
            kind = EventKind.TAKEOFF if dy_com > 0 else EventKind.DETACHMENT
            pending = Event(state.t, kind, state)
        for ev in self.events:
            if ev.kind in (EventKind.TAKEOFF, EventKind.DETACHMENT):
                pending = ev
            elif pending is not None:
                segments.append((pending, ev))
                pending = None
        if pending is not None:
            segments.append((pending, None))
        return segments


def _bisect_crossing(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Shrink ``[lo, hi]`` with ``fn(lo) > 0 >= fn(hi)`` to width ``tol``; return ``hi``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


class HybridSimulator:
    """Integrates one robot/controller/profile combination.

    ``piece`` arguments select the reference formula used inside a step; by
    default it is the one active at the step's start time, which keeps the
    torque continuous over the step.
    """

    def __init__(
        self,
        params: RobotParams,
        cfg: SimConfig,
        profile: ReferenceProfile,
        controller: ControllerConfig,
    ):
        self.params = params
        self.cfg = cfg
        self.profile = profile
        self.controller = controller

    def torque(self, state: SimState, piece=None) -> float:
        ref = piece(state.t) if piece is not None else self.profile(state.t)
        return control_torque(self.controller, ref, state)

    def accelerations(self, state: SimState, tau: float) -> Accelerations:
        if state.phase == Phase.ROLLING:
            return rolling_dynamics(self.params, state, tau)
        if state.phase == Phase.FLIGHT:
            return flight_dynamics(self.params, state, tau)
        return Accelerations(0.0, 0.0, 0.0, 0.0)

    def contact_forces(self, state: SimState, piece=None) -> ConstraintForces:
        if state.phase != Phase.ROLLING:
            return ConstraintForces(0.0, 0.0)
        tau = self.torque(state, piece)
        return constraint_forces(self.params, state, rolling_dynamics(self.params, state, tau))

    def _field(self, t: float, z: np.ndarray, phase: Phase, piece) -> np.ndarray:
        state = SimState.from_vector(t, z[:8], phase)
        tau = self.torque(state, piece)
        acc = self.accelerations(state, tau)
        return np.array(
            [
                z[4], z[5], z[6], z[7],
                acc.ddphi, acc.ddtheta, acc.ddx, acc.ddy,
                tau * state.psi_dot,
            ]
        )  # fmt: skip

    def step(self, state: SimState, h: float | None = None, piece=None) -> SimState:
        """Advance ``state`` by one RK4 step of length ``h`` (default ``cfg.dt``)."""
        if state.phase not in (Phase.ROLLING, Phase.FLIGHT):
            raise ValueError(f"cannot step a state in phase {state.phase.name}")
        h = self.cfg.dt if h is None else h
        if piece is None:
            piece = self.profile.piece_at(state.t)
        t = state.t
        z = np.append(state.vector(), state.work)
        try:
            with np.errstate(over="raise", invalid="raise"):
                k1 = self._field(t, z, state.phase, piece)
                k2 = self._field(t + 0.5 * h, z + 0.5 * h * k1, state.phase, piece)
                k3 = self._field(t + 0.5 * h, z + 0.5 * h * k2, state.phase, piece)
                k4 = self._field(t + h, z + h * k3, state.phase, piece)
                z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except (OverflowError, FloatingPointError) as exc:
            raise NumericalDivergenceError(f"overflow at t={t!r}: {exc}", state) from exc
        if not np.all(np.isfinite(z)):
            raise NumericalDivergenceError(f"non-finite state at t={t + h!r}", state)
        return SimState.from_vector(t + h, z[:8], state.phase, z[8])

    def release(self, state: SimState) -> Event:
        """Switch a rolling state to flight, classifying the release."""
        dy_com = com_kinematics(self.params, state)[3]
        kind = EventKind.TAKEOFF if dy_com > 0 else EventKind.DETACHMENT
        return Event(state.t, kind, state.with_phase(Phase.FLIGHT))

    def detect_takeoff(self, start: SimState, end: SimState, piece=None) -> Event | None:
        """Locate a loss of contact within the step ``start -> end``.

        Fires when the normal force at ``end`` is no longer positive; the
        crossing is bisected to ``event_time_tol``.  The returned state is on
        the released side of the crossing.
        """
        if piece is None:
            piece = self.profile.piece_at(start.t)
        if self.contact_forces(end, piece).lambda2 > 0:
            return None
        h = end.t - start.t

        def normal(s: float) -> float:
            return self.contact_forces(self.step(start, s, piece), piece).lambda2

        s = _bisect_crossing(normal, 0.0, h, self.cfg.event_time_tol)
        state = end if s == h else self.step(start, s, piece)
        return self.release(state)

    def detect_landing(
        self,
        start: SimState,
        end: SimState,
        piece=None,
        *,
        airborne: bool = True,
        flight_start: SimState | None = None,
    ) -> Event | None:
        """Locate touchdown of the hoop center within the step ``start -> end``.

        A landing is a downward zero crossing of ``y`` once the hoop has been
        above the ground (``airborne``).  Right after release the hoop center
        can sink slightly before lifting; if it sinks below
        ``-constraint_tol`` without ever rising, the separation failed and the
        landing is placed at ``flight_start``.
        """
        if not airborne:
            if end.y < -self.cfg.constraint_tol:
                origin = flight_start if flight_start is not None else start
                return Event(origin.t, EventKind.LANDING, origin.with_phase(Phase.LANDED))
            return None
        if end.y > 0:
            return None
        if piece is None:
            piece = self.profile.piece_at(start.t)
        h = end.t - start.t
        s = _bisect_crossing(lambda s: self.step(start, s, piece).y, 0.0, h, self.cfg.event_time_tol)
        state = end if s == h else self.step(start, s, piece)
        return Event(state.t, EventKind.LANDING, state.with_phase(Phase.LANDED))

    def _row(self, state: SimState) -> list[float]:
        p = self.params
        tau = self.torque(state)
        lam = self.contact_forces(state)
        x_com, y_com, _, _ = com_kinematics(p, state)
        e_kin, e_pot = total_energy(p, state)
        slip = state.phase == Phase.ROLLING and abs(lam.lambda1) > p.mu * lam.lambda2
        return [
            state.t, float(state.phase), state.phi, state.theta, state.x, state.y,
            state.dphi, state.dtheta, state.dx, state.dy, tau, lam.lambda1, lam.lambda2,
            x_com, y_com, e_kin, e_pot, float(slip),
        ]  # fmt: skip

    def _check_initial(self, state: SimState) -> None:
        if state.phase == Phase.ROLLING:
            tol = self.cfg.constraint_tol
            if abs(state.y) > tol or abs(state.dy) > tol:
                raise ParameterError("initial.y", "rolling state must have y = dy = 0")
            if abs(state.x - self.params.R * state.phi) > tol:
                raise ParameterError("initial.x", "rolling state must satisfy x = R*phi")
            if abs(state.dx - self.params.R * state.dphi) > tol:
                raise ParameterError("initial.dx", "rolling state must satisfy dx = R*dphi")
        elif state.phase != Phase.FLIGHT:
            raise ParameterError("initial.phase", "initial phase must be ROLLING or FLIGHT")

    def run(self, initial: SimState | None = None) -> TrajectoryRecord:
        """Integrate from ``initial`` (default: rest, pendulum down) until landing or ``t_end``."""
        cfg = self.cfg
        state = initial if initial is not None else SimState()
        self._check_initial(state)
        rows = [self._row(state)]
        work = [state.work]
        events: list[Event] = []
        breakpoints = sorted(self.profile.breakpoints())
        airborne = state.y > 0
        flight_start = state if state.phase == Phase.FLIGHT else None
        flight_row = 0

        def add_event(ev: Event) -> None:
            events.append(ev)
            if len(events) > cfg.max_events:
                raise RunawayChatterError(f"more than {cfg.max_events} events by t={ev.time}")

        while state.phase != Phase.LANDED and state.t < cfg.t_end:
            if state.phase == Phase.ROLLING and self.contact_forces(state).lambda2 <= 0:
                ev = self.release(state)
                add_event(ev)
                state, airborne, flight_start, flight_row = ev.state, False, ev.state, len(rows) - 1
                continue

            t = state.t
            while breakpoints and breakpoints[0] <= t:
                breakpoints.pop(0)
            h = min(cfg.dt, cfg.t_end - t)
            clipped_to = None
            if breakpoints and breakpoints[0] - t <= h:
                h = breakpoints[0] - t
                clipped_to = breakpoints[0]
            piece = self.profile.piece_at(t)
            new = self.step(state, h, piece)
            if clipped_to is not None:
                new = replace(new, t=clipped_to)
            elif cfg.t_end - new.t < 1e-12:
                new = replace(new, t=cfg.t_end)

            if state.phase == Phase.ROLLING:
                ev = self.detect_takeoff(state, new, piece)
                if ev is not None:
                    add_event(ev)
                    if ev.time > rows[-1][0]:
                        rows.append(self._row(ev.state.with_phase(Phase.ROLLING)))
                        work.append(ev.state.work)
                    state, airborne, flight_start, flight_row = ev.state, False, ev.state, len(rows) - 1
                    continue
            else:
                ev = self.detect_landing(
                    state, new, piece, airborne=airborne, flight_start=flight_start
                )
                if ev is not None:
                    add_event(ev)
                    if ev.time <= rows[-1][0]:
                        # failed separation: discard the flight samples
                        del rows[flight_row + 1 :], work[flight_row + 1 :]
                        rows[-1] = self._row(ev.state)
                    else:
                        rows.append(self._row(ev.state))
                        work.append(ev.state.work)
                    state = ev.state
                    break
                airborne = airborne or new.y > 0

            state = new
            rows.append(self._row(state))
            work.append(state.work)

        return TrajectoryRecord(np.array(rows), np.array(work), events)


def step(
    params: RobotParams,
    cfg: SimConfig,
    profile: ReferenceProfile,
    controller: ControllerConfig,
    state: SimState,
) -> SimState:
    """One fixed RK4 step of length ``cfg.dt`` in the state's phase."""
    return HybridSimulator(params, cfg, profile, controller).step(state)


def run_scenario(
    params: RobotParams,
    cfg: SimConfig,
    profile: ReferenceProfile,
    controller: ControllerConfig,
    initial: SimState | None = None,
) -> TrajectoryRecord:
    return HybridSimulator(params, cfg, profile, controller).run(initial)
