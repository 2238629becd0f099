import math

import numpy as np
import pytest

from intersection_rl.sim.vehicle import VehicleState, bicycle_step, predict_positions, wrap_angle


def make_state(**kw):
    defaults = dict(x=0.0, y=0.0, v=0.0, psi=0.0)
    defaults.update(kw)
    return VehicleState(**defaults)


def test_wrap_angle_range():
    for angle in np.linspace(-25.0, 25.0, 2001):
        wrapped = wrap_angle(float(angle))
        assert -math.pi < wrapped <= math.pi
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)


def test_zero_velocity_fixed_point():
    state = make_state(v=0.0, psi=0.7, x=3.0, y=-2.0)
    for steering in (0.0, 0.3, -1.0):
        nxt = bicycle_step(state, accel=0.0, steering=steering, dt=1 / 15)
        assert (nxt.x, nxt.y, nxt.v, nxt.psi) == (state.x, state.y, state.v, state.psi)


def test_straight_line_motion():
    state = make_state(v=5.0)
    nxt = bicycle_step(state, accel=0.0, steering=0.0, dt=1.0)
    assert nxt.x == pytest.approx(5.0)
    assert nxt.y == pytest.approx(0.0)
    assert nxt.psi == pytest.approx(0.0)
    assert nxt.v == pytest.approx(5.0)


def test_braking_saturates_at_standstill():
    state = make_state(v=1.0)
    nxt = bicycle_step(state, accel=-9.0, steering=0.0, dt=1.0)
    assert nxt.v == 0.0


def _fine_step_oracle(state, accel, steering, duration, dt=1e-4):
    """Independent high-resolution integration of the same kinematics."""
    x, y, v, psi = state.x, state.y, state.v, state.psi
    beta = math.atan(0.5 * math.tan(steering))
    steps = int(round(duration / dt))
    for _ in range(steps):
        x += v * math.cos(psi + beta) * dt
        y += v * math.sin(psi + beta) * dt
        psi += (v / state.length) * math.sin(beta) * dt
        v = max(0.0, v + accel * dt)
    return x, y, psi, v


def test_curved_motion_matches_fine_integration():
    state = make_state(v=5.0, length=5.0)
    coarse = state
    for _ in range(15):
        coarse = bicycle_step(coarse, accel=0.0, steering=0.2, dt=1 / 15)
    ox, oy, opsi, _ = _fine_step_oracle(state, 0.0, 0.2, duration=1.0)
    assert math.hypot(coarse.x - ox, coarse.y - oy) < 0.05
    assert abs(wrap_angle(coarse.psi - opsi)) < 0.02


def test_heading_stays_wrapped_under_long_turning():
    state = make_state(v=8.0)
    for _ in range(600):
        state = bicycle_step(state, accel=0.0, steering=0.9, dt=1 / 15)
        assert -math.pi < state.psi <= math.pi


def test_predict_positions_stationary():
    state = make_state(x=4.0, y=-7.0, v=0.0, psi=1.0)
    points = predict_positions(state, horizon=3.0, dt=0.5)
    assert points.shape == (6, 2)
    assert np.allclose(points, [[4.0, -7.0]] * 6)


def test_predict_positions_constant_velocity():
    state = make_state(v=4.0)
    points = predict_positions(state, horizon=3.0, dt=1.0)
    assert np.allclose(points, [[4.0, 0.0], [8.0, 0.0], [12.0, 0.0]])


def test_predict_positions_north_heading():
    state = make_state(v=2.0, psi=math.pi / 2)
    points = predict_positions(state, horizon=3.0, dt=0.5)
    assert np.allclose(points[:, 0], 0.0, atol=1e-12)
    assert np.allclose(points[:, 1], np.arange(1, 7))


def test_prediction_consistent_with_unsteered_rollout():
    state = make_state(x=1.0, y=2.0, v=6.0, psi=0.8)
    points = predict_positions(state, horizon=2.0, dt=1 / 15)
    rolled = state
    for k in range(points.shape[0]):
        rolled = bicycle_step(rolled, accel=0.0, steering=0.0, dt=1 / 15)
        assert math.hypot(rolled.x - points[k, 0], rolled.y - points[k, 1]) < 1e-9


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        bicycle_step(make_state(), 0.0, 0.0, dt=0.0)
    with pytest.raises(ValueError):
        predict_positions(make_state(), horizon=-1.0, dt=0.5)
