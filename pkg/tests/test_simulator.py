import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trailer_jackknife.analysis import LimitKind, jackknife_limits, region_map
from trailer_jackknife.circular import Arc
from trailer_jackknife.errors import DomainError, NumericError
from trailer_jackknife.kinematics import (
    ControlInput, SideslipState, SystemState, VehicleTrailerParams, curvature_from_steering,
)
from trailer_jackknife.simulator import (
    BackingControl, BackingGains, ConstantSlip, ConstantSteering, Path, Scenario, TerrainSlip,
    TrajectoryLog, backing_controller, clamp_into_arc, integrate_step, run_scenario,
    sideslip_schedule_terrain, steering_actuator, trailer_axle_position,
)

deg = math.radians
LONG = VehicleTrailerParams(3.0, 1.23, 2.51)


# ---------------------------------------------------------------- actuator

def test_actuator_reaches_nearby_command():
    assert steering_actuator(deg(10), deg(12), LONG, 0.01) == pytest.approx(deg(12))


def test_actuator_rate_clamp():
    p = replace(LONG, steering_wheel_rate_limit=deg(120))
    assert math.degrees(steering_actuator(0.0, deg(500), p, 0.1)) == pytest.approx(12.0)
    assert math.degrees(steering_actuator(0.0, deg(-500), p, 0.1)) == pytest.approx(-12.0)


def test_actuator_angle_clamp():
    p = replace(LONG, steering_wheel_rate_limit=deg(1e4))
    assert math.degrees(steering_actuator(deg(450), deg(600), p, 0.1)) == pytest.approx(500.0)


# ---------------------------------------------------------------- integrator

def test_zero_speed_leaves_state_unchanged():
    s = SystemState(1.0, -2.0, 0.3, 0.4, 0.1)
    assert integrate_step(s, ControlInput(0.0, kappa=0.1), LONG, SideslipState.degrees(3, 4, 5), 0.05) == s


def test_straight_backing_is_an_equilibrium():
    s = SystemState()
    for _ in range(1000):
        s = integrate_step(s, ControlInput(-1.0, kappa=0.0), LONG, SideslipState.zero(), 0.01)
    assert abs(s.psi) <= 1e-12
    assert s.x == pytest.approx(-10.0)


def test_nonfinite_state_raises():
    with pytest.raises(NumericError):
        integrate_step(SystemState(x=math.inf), ControlInput(-1.0, kappa=0.0), LONG,
                       SideslipState.zero(), 0.01)


def _psi_after(dt, T=4.0):
    s = SystemState(psi=deg(10))
    u = ControlInput(-1.0, kappa=0.12)
    slip = SideslipState.degrees(0, 4, -3)
    for _ in range(int(round(T / dt))):
        s = integrate_step(s, u, LONG, slip, dt)
    return s.psi


def test_rk4_step_halving_ratio():
    ref = _psi_after(0.0125)
    e1 = abs(_psi_after(0.2) - ref)
    e2 = abs(_psi_after(0.1) - ref)
    assert 12.0 < e1 / e2 < 20.0


def test_step_length_equals_speed_times_dt():
    s = SystemState(theta_V=0.7)
    nxt = integrate_step(s, ControlInput(-1.0, kappa=0.0), LONG, SideslipState.zero(), 0.01)
    assert math.hypot(nxt.x - s.x, nxt.y - s.y) == pytest.approx(0.01, rel=1e-12)


# ---------------------------------------------------------------- sideslip schedule

def test_terrain_slip_examples():
    zero = sideslip_schedule_terrain(deg(90), deg(90), 0.0)
    assert zero.beta_F == pytest.approx(0.0, abs=1e-15)
    assert zero.beta_R == pytest.approx(0.0, abs=1e-15)
    assert zero.beta_T == pytest.approx(0.0, abs=1e-15)
    full = sideslip_schedule_terrain(0.0, 0.0, 0.0)
    assert [math.degrees(b) for b in (full.beta_F, full.beta_R, full.beta_T)] == pytest.approx([30, 30, 30])
    assert TerrainSlip(0.0)(1.0, 2.0, 0.3) == SideslipState.zero()


def test_constant_slip_ignores_pose():
    s = SideslipState.degrees(1, 2, 3)
    assert ConstantSlip(s)(0.4, 1.0, 0.1) is s


# ---------------------------------------------------------------- path and controller

def test_path_projection_sign_and_heading():
    path = Path.straight(math.pi)
    lateral, heading = path.project(5.0, 2.0)
    assert heading == pytest.approx(math.pi)
    assert lateral == pytest.approx(-2.0)
    lateral, _ = Path(((0, 0), (10, 0), (10, 10))).project(12.0, 5.0)
    assert lateral == pytest.approx(-2.0)


def test_path_needs_two_points():
    with pytest.raises(DomainError):
        Path(((0.0, 0.0),))


def test_controller_on_path_commands_straight():
    p = replace(LONG, kappa_min=None, kappa_max=None)
    cmd = backing_controller(SystemState(theta_V=0.0), Path.straight(math.pi), BackingGains(), p, -1.0)
    assert cmd == pytest.approx(0.0, abs=1e-9)


def test_controller_command_is_saturated():
    cmd = backing_controller(SystemState(y=40.0, psi=deg(60)), Path.straight(math.pi),
                             BackingGains(), LONG, -1.0)
    assert abs(cmd) <= LONG.steering_wheel_limit + 1e-12


def test_clamp_into_arc():
    arc = Arc(deg(-40), deg(40))
    assert clamp_into_arc(deg(10), arc, deg(15)) == pytest.approx(deg(10))
    assert clamp_into_arc(deg(35), arc, deg(15)) == pytest.approx(deg(25))
    assert clamp_into_arc(deg(-90), arc, deg(15)) == pytest.approx(deg(-25))
    assert clamp_into_arc(deg(1), Arc(0.0, deg(20)), deg(15)) == pytest.approx(deg(10))
    assert clamp_into_arc(2.0, Arc.whole(), deg(15)) == 2.0


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_clamped_setpoint_stays_inside_region(y, psi, theta):
    p = VehicleTrailerParams(3.0, 1.23, 2.51, kappa_min=-0.1761, kappa_max=0.1761)
    rmap = region_map(p, SideslipState.zero())
    margin = deg(15)
    state = SystemState(y=y, theta_V=theta, psi=psi)
    # the clamp only acts on the setpoint; the command must still be finite
    cmd = backing_controller(state, Path.straight(math.pi), BackingGains(), p, -1.0, rmap, margin)
    assert math.isfinite(cmd)


# ---------------------------------------------------------------- scenarios

def _constant_run(psi0, wheel_deg, duration=30.0, slip=SideslipState.zero()):
    return run_scenario(Scenario(
        params=LONG, initial_state=SystemState(psi=deg(psi0), phi=deg(wheel_deg) / LONG.steering_ratio),
        v=-1.0, duration=duration, dt=0.01, slip_schedule=ConstantSlip(slip),
        controller=ConstantSteering(deg(wheel_deg))))


def test_scenario_validation():
    s = Scenario(params=LONG, initial_state=SystemState(), dt=0.2, controller=ConstantSteering(0.0))
    with pytest.raises(DomainError):
        s.validate()
    with pytest.raises(DomainError):
        Scenario(params=LONG, initial_state=SystemState()).validate()
    with pytest.raises(DomainError):
        Scenario(params=LONG, initial_state=SystemState(), duration=0.001,
                 controller=ConstantSteering(0.0)).validate()


def test_log_shape_and_limit_columns():
    log = _constant_run(0.0, 500.0, duration=1.0)
    assert len(log) == 101
    assert np.allclose(np.diff(log["t"]), 0.01)
    lim = jackknife_limits(LONG, SideslipState.zero())
    assert log["psi_plus_kmax"][0] == pytest.approx(lim[LimitKind.PLUS_KMAX].psi)
    assert np.all(np.isnan(log["lateral_error"]))
    assert log.error is None


def test_log_marks_missing_limits_empty():
    p = VehicleTrailerParams(3.0, 1.23, 8.0)
    log = run_scenario(Scenario(params=p, initial_state=SystemState(), duration=0.5,
                                controller=ConstantSteering(0.0)))
    assert np.all(np.isnan(log["psi_plus_kmax"]))


def test_safe_limit_is_not_crossed_from_inside():
    lim = jackknife_limits(LONG, SideslipState.zero())
    safe = lim[LimitKind.PLUS_KMIN].psi
    log = _constant_run(120.0, -500.0, duration=40.0)
    psi = np.unwrap(log["psi"])
    assert np.all(psi <= safe + 1e-6)
    assert abs(psi[-1] - safe) < deg(1)


def test_jackknife_region_is_monotone():
    log = _constant_run(60.0, 0.0, duration=20.0)
    psi = np.unwrap(log["psi"])
    inside = log["jackknife"] > 0
    assert inside[0]
    rate = np.diff(psi)[inside[:-1]]
    assert np.all(rate > 0) or np.all(rate < 0)


def test_trajectory_envelope():
    lo = np.unwrap(_constant_run(20.0, -500.0, 15.0)["psi"])
    hi = np.unwrap(_constant_run(20.0, 500.0, 15.0)["psi"])
    mid = np.unwrap(_constant_run(20.0, 150.0, 15.0)["psi"])
    a, b = np.minimum(lo, hi), np.maximum(lo, hi)
    assert np.all(mid >= a - 1e-9) and np.all(mid <= b + 1e-9)


def test_fig5_crosses_then_settles_on_safe_limit():
    path = Path.straight(math.pi)
    p = LONG
    gains = BackingGains(lateral=1.87, course=1.31, hitch=1.76, max_approach=deg(30))
    log = run_scenario(Scenario(params=p, initial_state=SystemState(y=-2.0), v=-1.0, duration=60.0,
                                controller=BackingControl(gains), path=path))
    jk = np.nonzero(log["jackknife"] > 0)[0]
    assert jk.size and 5.0 <= log["t"][jk[0]] <= 12.0
    final = jackknife_limits(p, SideslipState.zero())[LimitKind.PLUS_KMIN].psi
    assert abs(log["psi"][-1] - final) < deg(1)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_failure_returns_partial_log():
    s = Scenario(params=LONG, initial_state=SystemState(theta_V=math.inf), v=-1.0, duration=1.0,
                 controller=ConstantSteering(0.0))
    log = run_scenario(s)
    assert log.error is not None and log.error.step == 0
    assert len(log) == 1


def test_csv_round_trip(tmp_path):
    log = _constant_run(10.0, 200.0, duration=0.5, slip=SideslipState.degrees(2, 3, 4))
    out = tmp_path / "run.csv"
    log.write_csv(out)
    header = out.read_text().splitlines()[0].split(",")
    assert header[:3] == ["t", "x", "y"] and "psi_deg" in header
    back = TrajectoryLog.read_csv(out)
    for c in log.columns:
        assert np.allclose(back[c], log[c], rtol=1e-10, atol=1e-12, equal_nan=True)


def test_runs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _constant_run(10.0, 200.0, duration=2.0).write_csv(a)
    _constant_run(10.0, 200.0, duration=2.0).write_csv(b)
    assert a.read_bytes() == b.read_bytes()


def test_trailer_axle_position_straight():
    assert trailer_axle_position(SystemState(), LONG) == pytest.approx((-3.74, 0.0))


def test_logged_curvature_uses_current_slip():
    slip = SideslipState.degrees(3, -2, 1)
    log = _constant_run(0.0, 300.0, duration=0.1, slip=slip)
    expected = curvature_from_steering(deg(300) / LONG.steering_ratio, slip, LONG.wheelbase)
    assert log["kappa"][-1] == pytest.approx(expected)
