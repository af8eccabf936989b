"""Planar dynamics of a hoop driven by an internal pendulum.

Generalized coordinates are ``q = [phi, theta, x, y]``: hoop angle, pendulum
angle (both measured in the fixed frame, clockwise-positive so that rolling
in +x has ``phi`` increasing), and the position of the hoop's geometric
center.  ``phi = theta = 0`` puts the pendulum straight down, ``y = 0`` is
ground contact.  The motor applies ``+tau`` to the pendulum and ``-tau`` to
the hoop.

Two vector fields are provided:

* rolling: no-slip (``x = R phi``) and contact (``y = 0``) constraints active;
* flight: both constraints released, friction and normal force are zero.

All functions are pure; linear systems are solved in closed form so results
are bit-reproducible across BLAS builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .errors import ModelDegeneracyError, ParameterError

# Relative determinant threshold below which a mass matrix counts as singular.
_DET_RTOL = 1e-12


class Phase(IntEnum):
    ROLLING = 0
    FLIGHT = 1
    LANDED = 2


@dataclass(frozen=True)
class RobotParams:
    """Physical constants of the robot (SI units).

    Defaults describe the desk-scale prototype: 600 g total, 125 g offset
    mass on a 51 mm arm, 152 mm hoop diameter and a 0.376 N*m motor.  ``I_o``
    defaults to the thin-hoop value ``m_o * R**2`` when left as ``None``.
    """

    m_o: float = 0.475
    m_p: float = 0.125
    R: float = 0.076
    l_p: float = 0.051
    I_o: float | None = None
    g: float = 9.81
    tau_max: float = 0.376
    mu: float = 0.8
    kv: float = 380.0

    def __post_init__(self):
        if self.I_o is None:
            object.__setattr__(self, "I_o", self.m_o * self.R**2)
        for name in ("m_o", "m_p", "R", "l_p", "I_o", "g", "tau_max", "kv"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(name, f"must be finite and > 0, got {value!r}")
        if not math.isfinite(self.mu) or self.mu < 0:
            raise ParameterError("mu", f"must be finite and >= 0, got {self.mu!r}")
        if self.l_p >= self.R:
            raise ParameterError("l_p", f"pendulum length {self.l_p} must be smaller than R={self.R}")

    @property
    def m(self) -> float:
        """Total mass."""
        return self.m_o + self.m_p

    @property
    def com_offset(self) -> float:
        """Distance from the hoop center to the system COM, ``(m_p/m) * l_p``."""
        return self.m_p / self.m * self.l_p

    @property
    def reduced_mass(self) -> float:
        return self.m_o * self.m_p / self.m

    @property
    def body_length(self) -> float:
        """Hoop diameter, the unit used for jump heights and spans."""
        return 2.0 * self.R


@dataclass(frozen=True)
class SimState:
    """Generalized coordinates and velocities at time ``t``.

    ``work`` is the actuator work ``integral(tau * psi_dot dt)`` accumulated
    since the start of the run; it is carried along so energy balance can be
    checked without re-integrating the torque history.
    """

    t: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    x: float = 0.0
    y: float = 0.0
    dphi: float = 0.0
    dtheta: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    phase: Phase = Phase.ROLLING
    work: float = 0.0

    @property
    def psi_dot(self) -> float:
        """Pendulum angular velocity relative to the hoop."""
        return self.dtheta - self.dphi

    def vector(self) -> np.ndarray:
        """``[phi, theta, x, y, dphi, dtheta, dx, dy]`` as a float array."""
        return np.array(
            [self.phi, self.theta, self.x, self.y, self.dphi, self.dtheta, self.dx, self.dy]
        )

    @classmethod
    def from_vector(cls, t: float, vec, phase: Phase, work: float = 0.0) -> "SimState":
        phi, theta, x, y, dphi, dtheta, dx, dy = (float(v) for v in vec)
        return cls(t, phi, theta, x, y, dphi, dtheta, dx, dy, Phase(phase), float(work))

    def with_phase(self, phase: Phase) -> "SimState":
        return replace(self, phase=Phase(phase))


class ConstraintForces(NamedTuple):
    lambda1: float  # friction, N
    lambda2: float  # normal reaction, N


class Accelerations(NamedTuple):
    ddphi: float
    ddtheta: float
    ddx: float
    ddy: float


def rolling_mass_matrix(params: RobotParams, theta: float) -> np.ndarray:
    c = math.cos(theta)
    p = params
    coupling = -p.m_p * p.l_p * p.R * c
    return np.array([[p.I_o + p.m * p.R**2, coupling], [coupling, p.m_p * p.l_p**2]])


def flight_mass_matrix(params: RobotParams, theta: float) -> np.ndarray:
    """Mass matrix of the ``(theta, x, y)`` block of the flight equations."""
    c, s = math.cos(theta), math.sin(theta)
    p = params
    a = p.m_p * p.l_p
    return np.array([[a * p.l_p, -a * c, a * s], [-a * c, p.m, 0.0], [a * s, 0.0, p.m]])


def rolling_dynamics(params: RobotParams, state: SimState, tau: float) -> Accelerations:
    """Accelerations while rolling without slip.

    Solves
    ``(I_o + m R^2) ddphi - m_p l_p R cos(theta) ddtheta = -tau - m_p l_p R dtheta^2 sin(theta)``
    ``-m_p l_p R cos(theta) ddphi + m_p l_p^2 ddtheta = tau - m_p l_p g sin(theta)``
    and returns ``ddx = R ddphi``, ``ddy = 0``.
    """
    p = params
    c, s = math.cos(state.theta), math.sin(state.theta)
    a11 = p.I_o + p.m * p.R**2
    a12 = -p.m_p * p.l_p * p.R * c
    a22 = p.m_p * p.l_p**2
    det = a11 * a22 - a12 * a12
    if not det > _DET_RTOL * a11 * a22:
        raise ModelDegeneracyError(f"rolling mass matrix singular (det={det!r})")
    b1 = -tau - p.m_p * p.l_p * p.R * state.dtheta**2 * s
    b2 = tau - p.m_p * p.l_p * p.g * s
    ddphi = (b1 * a22 - a12 * b2) / det
    ddtheta = (a11 * b2 - a12 * b1) / det
    return Accelerations(ddphi, ddtheta, p.R * ddphi, 0.0)


def constraint_forces(params: RobotParams, state: SimState, acc: Accelerations) -> ConstraintForces:
    """Friction and normal reaction needed to keep the hoop rolling on the ground."""
    p = params
    c, s = math.cos(state.theta), math.sin(state.theta)
    w2 = state.dtheta**2
    a = p.m_p * p.l_p
    lambda1 = a * (-w2 * s + acc.ddtheta * c) - p.m * p.R * acc.ddphi
    lambda2 = a * (w2 * c + acc.ddtheta * s) + p.m * p.g
    return ConstraintForces(lambda1, lambda2)


def flight_dynamics(params: RobotParams, state: SimState, tau: float) -> Accelerations:
    """Accelerations with both ground constraints released.

    The hoop equation decouples (``I_o ddphi = -tau``).  The remaining 3x3
    system in ``(ddtheta, ddx, ddy)`` is solved by eliminating the
    translational rows, whose Schur complement is ``mu_r l_p^2`` with
    ``mu_r`` the reduced mass of hoop and pendulum.
    """
    p = params
    c, s = math.cos(state.theta), math.sin(state.theta)
    a = p.m_p * p.l_p
    det = p.m * p.m_p * p.m_o * p.l_p**2
    if not det > _DET_RTOL * p.m**2 * p.m_p * p.l_p**2:
        raise ModelDegeneracyError(f"flight mass matrix singular (det={det!r})")
    w2 = state.dtheta**2
    # row 1 after substituting rows 2-3: (m_p l_p^2 - a^2/m) ddtheta = tau
    ddtheta = tau / (p.m_p * p.l_p**2 - a * a / p.m)
    ddx = a * (ddtheta * c - w2 * s) / p.m
    ddy = -a * (ddtheta * s + w2 * c) / p.m - p.g
    return Accelerations(-tau / p.I_o, ddtheta, ddx, ddy)


def com_kinematics(params: RobotParams, state: SimState) -> tuple[float, float, float, float]:
    """Position and velocity of the system center of mass.

    The pendulum mass sits at ``(x - l_p sin(theta), y - l_p cos(theta))``.
    """
    k = params.com_offset
    c, s = math.cos(state.theta), math.sin(state.theta)
    return (
        state.x - k * s,
        state.y - k * c,
        state.dx - k * state.dtheta * c,
        state.dy + k * state.dtheta * s,
    )


def com_acceleration(params: RobotParams, state: SimState, acc: Accelerations) -> tuple[float, float]:
    k = params.com_offset
    c, s = math.cos(state.theta), math.sin(state.theta)
    w2 = state.dtheta**2
    return (
        acc.ddx - k * (acc.ddtheta * c - w2 * s),
        acc.ddy + k * (acc.ddtheta * s + w2 * c),
    )


def total_energy(params: RobotParams, state: SimState) -> tuple[float, float]:
    """Kinetic and potential energy ``(T, V)`` in joules."""
    p = params
    c, s = math.cos(state.theta), math.sin(state.theta)
    vpx = state.dx - p.l_p * state.dtheta * c
    vpy = state.dy + p.l_p * state.dtheta * s
    kinetic = 0.5 * (
        p.m_o * (state.dx**2 + state.dy**2) + p.I_o * state.dphi**2 + p.m_p * (vpx**2 + vpy**2)
    )
    potential = p.m_o * p.g * state.y + p.m_p * p.g * (state.y - p.l_p * c)
    return kinetic, potential


def angular_momentum_about_com(params: RobotParams, state: SimState) -> float:
    """Total angular momentum about the COM, clockwise-positive like ``phi``.

    Only internal torque acts in flight, so this is conserved there.
    """
    p = params
    return p.I_o * state.dphi + p.reduced_mass * p.l_p**2 * state.dtheta


def torque_constant(params: RobotParams) -> float:
    """``K_t = 60 / (2 pi kv)`` in N*m/A."""
    return 60.0 / (2.0 * math.pi * params.kv)


def motor_current(params: RobotParams, tau: float) -> float:
    """Quadrature current drawn for torque ``tau`` (static map, diagnostic only)."""
    return tau / torque_constant(params)
