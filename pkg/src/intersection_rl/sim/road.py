"""Four-arm unsignalized intersection: lanes, routes, and road priorities.

Right-hand traffic, one lane per direction. Approach lanes end at the edge of
a central conflict zone whose half-extent is larger than the paved overlap so
that turn arcs stay within the bicycle model's minimum turning radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .lanes import ArcLane, Lane, RoutePath, StraightLane

ARM_ORDER = ("south", "east", "north", "west")
MOVEMENTS = ("left", "straight", "right")

# Exit arm of each movement for a vehicle arriving from the south.
_BASE_EXIT = {"straight": "north", "right": "east", "left": "west"}


def _rotate_arm(arm: str, quarter_turns: int) -> str:
    return ARM_ORDER[(ARM_ORDER.index(arm) + quarter_turns) % 4]


def _rot_point(x: float, y: float, quarter_turns: int) -> tuple[float, float]:
    for _ in range(quarter_turns % 4):
        x, y = -y, x
    return x, y


def _rot_lane(lane: Lane, k: int) -> Lane:
    if isinstance(lane, StraightLane):
        x0, y0 = _rot_point(lane.x0, lane.y0, k)
        x1, y1 = _rot_point(lane.x1, lane.y1, k)
        return StraightLane(x0, y0, x1, y1)
    cx, cy = _rot_point(lane.cx, lane.cy, k)
    return ArcLane(cx, cy, lane.radius, lane.start_angle + k * math.pi / 2, lane.sweep)


@dataclass
class RoadNetwork:
    lane_width: float = 4.0  # m
    approach_length: float = 60.0  # m
    zone_half: float = 12.0  # m, conflict-zone half extent (approach lanes end here)

    lanes: dict[str, Lane] = field(init=False, default_factory=dict)
    _paths: dict[tuple[str, ...], RoutePath] = field(init=False, default_factory=dict)

    def __post_init__(self):
        if self.lane_width <= 0:
            raise ValueError("lane_width must be positive")
        off = self.lane_width / 2
        z = self.zone_half
        far = z + self.approach_length

        base: dict[str, Lane] = {
            "in:south": StraightLane(off, -far, off, -z),
            "out:north": StraightLane(off, z, off, far),
            "turn:south:straight": StraightLane(off, -z, off, z),
            # Right turn hugs the near corner, left turn sweeps around the far one.
            "turn:south:right": ArcLane(z, -z, z - off, math.pi, -math.pi / 2),
            "turn:south:left": ArcLane(-z, -z, z + off, 0.0, math.pi / 2),
        }
        for k, arm in enumerate(ARM_ORDER):
            for name, lane in base.items():
                parts = name.split(":")
                parts[1] = _rotate_arm(parts[1], k)
                self.lanes[":".join(parts)] = _rot_lane(lane, k)

    def route(self, arm: str, movement: str) -> tuple[str, ...]:
        """Lane ids traversed from the given approach arm to its destination."""
        if arm not in ARM_ORDER:
            raise ValueError(f"unknown arm {arm!r}")
        if movement not in MOVEMENTS:
            raise ValueError(f"unknown movement {movement!r}")
        return (f"in:{arm}", f"turn:{arm}:{movement}", f"out:{self.exit_arm(arm, movement)}")

    def exit_arm(self, arm: str, movement: str) -> str:
        k = ARM_ORDER.index(arm)
        return _rotate_arm(_BASE_EXIT[movement], k)

    def route_path(self, route: tuple[str, ...]) -> RoutePath:
        if route not in self._paths:
            self._paths[route] = RoutePath(route, tuple(self.lanes[lid] for lid in route))
        return self._paths[route]

    @staticmethod
    def road_of(arm: str) -> str:
        return "ns" if arm in ("south", "north") else "ew"

    @property
    def map_extent(self) -> float:
        """Distance from the center to the far end of any arm."""
        return self.zone_half + self.approach_length
