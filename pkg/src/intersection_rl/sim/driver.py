"""Scripted longitudinal (IDM) and lateral (route-tracking) control."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lanes import RoutePath
from .vehicle import STEERING_MAX, VehicleState, wrap_angle


@dataclass(frozen=True)
class IdmParams:
    v0: float = 9.0  # desired speed, m/s
    a_max: float = 3.0  # m/s^2
    b: float = 5.0  # comfortable deceleration, m/s^2
    b_max: float = 9.0  # emergency/yield braking, m/s^2
    delta: float = 4.0  # acceleration exponent
    time_gap: float = 1.5  # s
    s0: float = 2.0  # jam distance, m


@dataclass(frozen=True)
class Lead:
    """Leader as seen by a follower: bumper-to-bumper gap and leader speed."""

    gap: float  # m, > 0
    speed: float  # m/s


def idm_acceleration(
    follower: VehicleState,
    leader: Lead | None = None,
    params: IdmParams = IdmParams(),
    desired_speed: float | None = None,
) -> float:
    """Intelligent Driver Model acceleration, clamped to [-b_max, a_max]."""
    p = params
    v0 = p.v0 if desired_speed is None else desired_speed
    v = follower.v
    accel = p.a_max * (1.0 - (v / v0) ** p.delta)
    if leader is not None:
        if leader.gap <= 0.0:
            raise ValueError(f"leader gap must be positive, got {leader.gap}")
        dv = v - leader.speed
        s_star = p.s0 + v * p.time_gap + v * dv / (2.0 * math.sqrt(p.a_max * p.b))
        accel -= p.a_max * (s_star / leader.gap) ** 2
    return min(max(accel, -p.b_max), p.a_max)


@dataclass(frozen=True)
class SteeringGains:
    lateral: float = 0.35  # heading setpoint per metre of lateral error, rad/m
    heading: float = 4.0  # steering per radian of heading error
    setpoint_limit: float = math.pi / 4  # cap on the commanded heading offset


def steering_from_error(
    lateral: float, psi_ref: float, psi: float, gains: SteeringGains = SteeringGains()
) -> float:
    """Cascade law: lateral error -> heading setpoint, heading error -> steering."""
    offset = min(max(-gains.lateral * lateral, -gains.setpoint_limit), gains.setpoint_limit)
    heading_error = wrap_angle(psi_ref + offset - psi)
    steering = gains.heading * heading_error
    return min(max(steering, -STEERING_MAX), STEERING_MAX)


def steering_for_route(
    state: VehicleState, path: RoutePath, gains: SteeringGains = SteeringGains()
) -> float:
    """Steering command that tracks the given route from the current pose."""
    s, lat, _, _ = path.project(state.x, state.y)
    return steering_from_error(lat, path.heading_at(s), state.psi, gains)
