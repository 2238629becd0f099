"""Oriented-rectangle collision test (separating axis theorem)."""

from __future__ import annotations

import math

from .vehicle import VehicleState


def rectangle_corners(state: VehicleState) -> list[tuple[float, float]]:
    """The four corners of the vehicle footprint, counterclockwise."""
    c, s = math.cos(state.psi), math.sin(state.psi)
    hl, hw = state.length / 2, state.width / 2
    corners = []
    for dl, dw in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        corners.append((state.x + dl * c - dw * s, state.y + dl * s + dw * c))
    return corners


def _separated(axis: tuple[float, float], ca, cb) -> bool:
    ax, ay = axis
    pa = [x * ax + y * ay for x, y in ca]
    pb = [x * ax + y * ay for x, y in cb]
    return max(pa) < min(pb) or max(pb) < min(pa)


def check_collision(a: VehicleState, b: VehicleState) -> bool:
    """True iff the two oriented rectangles overlap (touching counts)."""
    # Cheap reject: beyond the sum of circumscribed radii they cannot touch.
    ra = math.hypot(a.length, a.width) / 2
    rb = math.hypot(b.length, b.width) / 2
    if math.hypot(a.x - b.x, a.y - b.y) > ra + rb:
        return False

    ca = rectangle_corners(a)
    cb = rectangle_corners(b)
    for state in (a, b):
        c, s = math.cos(state.psi), math.sin(state.psi)
        for axis in ((c, s), (-s, c)):
            if _separated(axis, ca, cb):
                return False
    return True
