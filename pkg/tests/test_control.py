import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from jumpwheel import ControllerConfig, ParameterError, ReferenceProfile, Segment, SimState, builtin_profiles
from jumpwheel.control import CONSTANT, RAMP, control_torque, eval_reference


@pytest.fixture(scope="module")
def profiles():
    return builtin_profiles()


@pytest.mark.parametrize(
    "name, t, expected",
    [
        ("vertical", 0.0, 0.0),
        ("vertical", 2.0, -4.0),
        ("vertical", 4.999, -9.998),
        ("vertical", 5.0, -40.0),
        ("vertical", 5.1, -40.0),
        ("vertical", 5.2, 200.0),
        ("vertical", 5.3, 200.0),
        ("vertical", 50.0, 200.0),
        ("horizontal", 3.0, -18.66),
        ("horizontal", 3.75, -150.0),
        ("horizontal", 4.5, -150.0),
        ("horizontal", 5.0, -150.0),
    ],
)
def test_builtin_profiles(profiles, name, t, expected):
    assert eval_reference(profiles[name], t) == pytest.approx(expected, abs=1e-12)


def test_negative_time_rejected(profiles):
    with pytest.raises(ValueError):
        eval_reference(profiles["vertical"], -0.1)


@given(st.floats(0.0, 100.0))
def test_vertical_envelope(t):
    value = builtin_profiles()["vertical"](t)
    assert value in (-40.0, 200.0) or value == pytest.approx(-2.0 * t)
    assert -40.0 <= value <= 200.0 or t < 5.0


def test_terminal_hold_of_ramp():
    prof = ReferenceProfile([Segment(0.0, 2.0, RAMP, 3.0, start_value=1.0)])
    assert prof(1.0) == 4.0
    assert prof(2.0) == 7.0
    assert prof(10.0) == 7.0


def test_piece_extends_formula_past_breakpoint(profiles):
    piece = profiles["vertical"].piece_at(4.9999)
    assert piece(5.0) == pytest.approx(-10.0)
    assert profiles["vertical"](5.0) == -40.0


def test_breakpoints(profiles):
    assert profiles["vertical"].breakpoints() == [5.0, 5.2]
    assert profiles["horizontal"].breakpoints() == [3.75, 4.75]


@pytest.mark.parametrize(
    "segments, key",
    [
        ([], "profile.segments"),
        ([Segment(1.0, 2.0, CONSTANT, 0.0)], "profile.segments.0.t_start"),
        ([Segment(0.0, 1.0, CONSTANT, 0.0), Segment(1.5, 2.0, CONSTANT, 0.0)], "profile.segments.1.t_start"),
        ([Segment(0.0, 1.0, "sine", 0.0)], "profile.segments.0.kind"),
        ([Segment(0.0, 0.0, CONSTANT, 0.0)], "profile.segments.0.t_end"),
        ([Segment(0.0, math.inf, CONSTANT, 0.0), Segment(math.inf, math.inf, CONSTANT, 1.0)], "profile.segments.0.t_end"),
    ],
)
def test_invalid_profiles(segments, key):
    with pytest.raises(ParameterError) as exc:
        ReferenceProfile(segments)
    assert exc.value.key == key


class TestControlTorque:
    def test_zero_error(self):
        state = SimState(dphi=2.0, dtheta=-3.0)
        assert control_torque(ControllerConfig(kp=0.5), state.psi_dot, state) == 0.0

    def test_saturation(self):
        cfg = ControllerConfig(kp=0.5, saturation_enabled=True)
        assert control_torque(cfg, 10.0, SimState()) == pytest.approx(0.376)
        assert control_torque(cfg, -10.0, SimState()) == pytest.approx(-0.376)

    def test_unsaturated(self):
        cfg = ControllerConfig(kp=0.5, saturation_enabled=False)
        assert control_torque(cfg, 10.0, SimState()) == pytest.approx(5.0)

    def test_sign_follows_relative_speed(self):
        # psi_dot = dtheta - dphi; pendulum lagging its reference gets positive torque
        cfg = ControllerConfig(kp=1.0)
        assert control_torque(cfg, 0.0, SimState(dphi=1.0)) == pytest.approx(1.0)
        assert control_torque(cfg, 0.0, SimState(dtheta=1.0)) == pytest.approx(-1.0)

    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-3, 10.0), st.booleans())
    def test_odd_and_bounded(self, ref, psi, kp, sat):
        cfg = ControllerConfig(kp=kp, saturation_enabled=sat)
        state = SimState(dtheta=psi)
        mirrored = SimState(dtheta=-psi)
        tau = control_torque(cfg, ref, state)
        assert control_torque(cfg, -ref, mirrored) == -tau
        if sat:
            assert abs(tau) <= cfg.tau_max

    @pytest.mark.parametrize("field, value", [("kp", 0.0), ("kp", -1.0), ("tau_max", 0.0)])
    def test_invalid(self, field, value):
        with pytest.raises(ParameterError) as exc:
            ControllerConfig(**{field: value})
        assert exc.value.key == field
