import math

import pytest

from intersection_rl.sim.driver import (
    IdmParams,
    Lead,
    SteeringGains,
    idm_acceleration,
    steering_for_route,
)
from intersection_rl.sim.lanes import RoutePath, StraightLane
from intersection_rl.sim.vehicle import VehicleState, bicycle_step


def follower(v):
    return VehicleState(x=0.0, y=0.0, v=v, psi=0.0)


def test_idm_free_flow_equilibrium():
    p = IdmParams()
    assert idm_acceleration(follower(p.v0), None, p) == pytest.approx(0.0)


def test_idm_standstill_accelerates_at_max():
    p = IdmParams()
    assert idm_acceleration(follower(0.0), None, p) == pytest.approx(p.a_max)


def test_idm_with_leader_matches_formula():
    p = IdmParams(v0=10.0, a_max=3.0, b=5.0, delta=4, time_gap=1.5, s0=2.0)
    v, gap = 8.0, 20.0
    # direct evaluation of the car-following law with zero closing speed
    s_star = p.s0 + v * p.time_gap + v * 0.0 / (2 * math.sqrt(p.a_max * p.b))
    expected = p.a_max * (1 - (v / p.v0) ** 4 - (s_star / gap) ** 2)
    got = idm_acceleration(follower(v), Lead(gap=gap, speed=v), p)
    assert got == pytest.approx(expected)
    assert expected == pytest.approx(3.0 * (1 - 0.4096 - 0.49))


def test_idm_clamped_to_braking_limit():
    p = IdmParams()
    got = idm_acceleration(follower(9.0), Lead(gap=0.5, speed=0.0), p)
    assert got == -p.b_max


def test_idm_rejects_nonpositive_gap():
    with pytest.raises(ValueError):
        idm_acceleration(follower(5.0), Lead(gap=0.0, speed=1.0))


def straight_path():
    return RoutePath(("lane",), (StraightLane(0.0, 0.0, 200.0, 0.0),))


def test_steering_zero_on_centerline():
    state = VehicleState(x=10.0, y=0.0, v=5.0, psi=0.0)
    assert steering_for_route(state, straight_path()) == pytest.approx(0.0)


def test_steering_sign_toward_centerline():
    left_of_lane = VehicleState(x=10.0, y=1.0, v=5.0, psi=0.0)
    right_of_lane = VehicleState(x=10.0, y=-1.0, v=5.0, psi=0.0)
    assert steering_for_route(left_of_lane, straight_path()) < 0.0
    assert steering_for_route(right_of_lane, straight_path()) > 0.0


def test_lateral_error_converges_within_six_seconds():
    path = straight_path()
    state = VehicleState(x=0.0, y=1.0, v=5.0, psi=0.0)
    dt = 1 / 15
    elapsed = 0.0
    while elapsed < 6.0:
        steering = steering_for_route(state, path)
        state = bicycle_step(state, accel=0.0, steering=steering, dt=dt)
        elapsed += dt
        if abs(state.y) < 0.1:
            break
    assert abs(state.y) < 0.1, f"lateral error {state.y:.3f} after {elapsed:.2f}s"


def test_steering_clamped():
    gains = SteeringGains()
    state = VehicleState(x=0.0, y=15.0, v=5.0, psi=math.pi / 2)
    assert abs(steering_for_route(state, straight_path(), gains)) <= math.pi / 3 + 1e-12
