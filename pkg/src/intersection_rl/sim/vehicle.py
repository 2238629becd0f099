"""Vehicle state and kinematic motion primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi

# Actuator limits applied inside bicycle_step; callers may clamp tighter.
STEERING_MAX = math.pi / 3  # rad
ACCEL_MAX = 9.0  # m/s^2, hardest braking/acceleration the chassis allows


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


@dataclass(slots=True)
class VehicleState:
    x: float  # m east
    y: float  # m north
    v: float  # m/s, never negative
    psi: float  # rad heading, kept in (-pi, pi]
    length: float = 5.0  # m
    width: float = 2.0  # m
    route: tuple[str, ...] = ()  # lane ids from spawn to destination
    priority_rank: int = 0  # lower rank yields in conflicts
    vid: int = 0

    def velocity(self) -> tuple[float, float]:
        """Velocity vector (vx, vy) in the world frame."""
        return self.v * math.cos(self.psi), self.v * math.sin(self.psi)

    def copy(self) -> "VehicleState":
        return replace(self)


def bicycle_step(state: VehicleState, accel: float, steering: float, dt: float) -> VehicleState:
    """Advance one kinematic-bicycle step of duration dt.

    Steering and acceleration are clamped to actuator limits; braking
    saturates at standstill so speed never goes negative.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    steering = min(max(steering, -STEERING_MAX), STEERING_MAX)
    accel = min(max(accel, -ACCEL_MAX), ACCEL_MAX)

    beta = math.atan(0.5 * math.tan(steering))
    v = state.v
    x = state.x + v * math.cos(state.psi + beta) * dt
    y = state.y + v * math.sin(state.psi + beta) * dt
    psi = wrap_angle(state.psi + (v / state.length) * math.sin(beta) * dt)
    v_next = max(0.0, v + accel * dt)
    return replace(state, x=x, y=y, v=v_next, psi=psi)


def predict_positions(state: VehicleState, horizon: float, dt: float) -> np.ndarray:
    """Future positions at t = dt, 2*dt, ... <= horizon under frozen speed and heading.

    Returns an array of shape (k, 2).
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    steps = int(round(horizon / dt))
    t = np.arange(1, steps + 1) * dt
    vx, vy = state.velocity()
    out = np.empty((steps, 2))
    out[:, 0] = state.x + vx * t
    out[:, 1] = state.y + vy * t
    return out
