"""Jump metrics and physics diagnostics computed from trajectory records."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateSegmentError
from .model import Phase, RobotParams, SimState, com_acceleration, flight_dynamics
from .sim import EventKind, TrajectoryRecord


@dataclass
class JumpMetrics:
    """Measurements of one flight segment.

    Heights are the hoop center's rise above its rolling height; spans are
    the hoop center's horizontal travel.  ``*_bl`` values are in body lengths
    (hoop diameters).  ``landing_time`` is None when the run ended in the air.
    """

    takeoff_time: float
    landing_time: float | None
    apex_height_m: float
    apex_height_bl: float
    horizontal_span_m: float
    horizontal_span_bl: float
    com_launch_velocity: tuple[float, float]
    jump_classified: bool
    com_apex_height_m: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["com_launch_velocity"] = list(self.com_launch_velocity)
        return d


@dataclass
class DiagnosticsReport:
    energy_residual_j: float = 0.0
    energy_residual_per_s: float = 0.0
    rolling_constraint_residual_m: float = 0.0
    slip_intervals: list[tuple[float, float, float]] = field(default_factory=list)
    flight_parabola_residual_m: float = 0.0
    flight_com_accel_residual: float = 0.0
    flight_com_distance_residual_m: float = 0.0
    flight_angular_momentum_drift: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slip_intervals"] = [list(iv) for iv in self.slip_intervals]
        return d


def _segment_mask(record: TrajectoryRecord, t0: float, t1: float | None) -> np.ndarray:
    t = record["t"]
    upper = t[-1] if t1 is None else t1
    return (t >= t0) & (t <= upper)


def _parabolic_peak(t: np.ndarray, y: np.ndarray) -> float:
    """Maximum of ``y`` refined by a parabola through the best sample and its neighbours."""
    i = int(np.argmax(y))
    if i == 0 or i == len(y) - 1:
        return float(y[i])
    coef = np.polyfit(t[i - 1 : i + 2] - t[i], y[i - 1 : i + 2], 2)
    if coef[0] >= 0:
        return float(y[i])
    return float(max(y[i], coef[2] - coef[1] ** 2 / (4.0 * coef[0])))


def jump_metrics(record: TrajectoryRecord, params: RobotParams) -> list[JumpMetrics]:
    """One ``JumpMetrics`` per flight segment of ``record``."""
    out = []
    bl = params.body_length
    for release, landing in record.flight_segments():
        t1 = landing.time if landing is not None else None
        mask = _segment_mask(record, release.time, t1)
        if mask.sum() < 2:
            raise DegenerateSegmentError(f"flight segment at t={release.time} has a single sample")
        t = record["t"][mask]
        y = record["y"][mask]
        x = record["x"][mask]
        apex = _parabolic_peak(t, y)
        span = float(x[-1] - x[0])

        k = params.com_offset
        s = release.state
        vx = s.dx - k * s.dtheta * math.cos(s.theta)
        vy = s.dy + k * s.dtheta * math.sin(s.theta)
        y_com0 = s.y - k * math.cos(s.theta)
        # the COM rests at -k when rolling with the pendulum down
        com_apex = y_com0 + max(vy, 0.0) ** 2 / (2.0 * params.g) + k

        out.append(
            JumpMetrics(
                takeoff_time=release.time,
                landing_time=t1,
                apex_height_m=apex,
                apex_height_bl=apex / bl,
                horizontal_span_m=span,
                horizontal_span_bl=span / bl,
                com_launch_velocity=(vx, vy),
                jump_classified=release.kind == EventKind.TAKEOFF,
                com_apex_height_m=com_apex,
            )
        )
    return out


def _runs(flags: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of maximal runs of True."""
    runs = []
    start = None
    for i, f in enumerate(flags):
        if f and start is None:
            start = i
        elif not f and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(flags) - 1))
    return runs


def _state_at(record: TrajectoryRecord, i: int) -> SimState:
    row = record.data[i]
    return SimState.from_vector(row[0], row[2:10], Phase(int(row[1])))


def diagnostics(record: TrajectoryRecord, params: RobotParams, mu: float | None = None) -> DiagnosticsReport:
    """Check a record against the model's conservation laws and constraints.

    ``mu`` overrides ``params.mu`` for slip detection.
    """
    mu = params.mu if mu is None else mu
    report = DiagnosticsReport()
    t = record["t"]
    phase = record["phase"].astype(int)

    energy = record["e_kin"] + record["e_pot"]
    residual = np.abs(energy - energy[0] - (record.work - record.work[0]))
    report.energy_residual_j = float(residual.max())
    duration = float(t[-1] - t[0])
    report.energy_residual_per_s = report.energy_residual_j / duration if duration > 0 else 0.0

    rolling = phase == Phase.ROLLING
    if rolling.any():
        r = np.maximum(
            np.abs(record["x"][rolling] - params.R * record["phi"][rolling]),
            np.abs(record["y"][rolling]),
        )
        report.rolling_constraint_residual_m = float(r.max())

        lam1, lam2 = np.abs(record["lambda1"]), record["lambda2"]
        slipping = rolling & (lam1 > mu * lam2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(lam2 > 0, lam1 / lam2, np.inf)
        for i0, i1 in _runs(slipping):
            report.slip_intervals.append((float(t[i0]), float(t[i1]), float(ratio[i0 : i1 + 1].max())))

    k = params.com_offset
    for release, landing in record.flight_segments():
        mask = _segment_mask(record, release.time, landing.time if landing else None)
        idx = np.flatnonzero(mask)
        if len(idx) < 3:
            continue
        ts = t[idx] - t[idx[0]]
        for name, deg in (("x_com", 1), ("y_com", 2)):
            vals = record[name][idx]
            fit = np.polyval(np.polyfit(ts, vals, deg), ts)
            report.flight_parabola_residual_m = max(
                report.flight_parabola_residual_m, float(np.abs(vals - fit).max())
            )

        dist = np.hypot(record["x"][idx] - record["x_com"][idx], record["y"][idx] - record["y_com"][idx])
        report.flight_com_distance_residual_m = max(
            report.flight_com_distance_residual_m, float(np.abs(dist - k).max())
        )

        h = params.I_o * record["dphi"][idx] + params.reduced_mass * params.l_p**2 * record["dtheta"][idx]
        if abs(h[0]) > 0:
            report.flight_angular_momentum_drift = max(
                report.flight_angular_momentum_drift, float(np.abs(h - h[0]).max() / abs(h[0]))
            )

        for i in idx:
            if phase[i] != Phase.FLIGHT:
                continue
            state = _state_at(record, i)
            acc = flight_dynamics(params, state, record["tau"][i])
            ax, ay = com_acceleration(params, state, acc)
            report.flight_com_accel_residual = max(
                report.flight_com_accel_residual, abs(float(ax)), abs(float(ay) + params.g)
            )
    return report
