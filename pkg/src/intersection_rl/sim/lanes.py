"""Lane geometry: straight segments, circular arcs, and multi-lane route paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .vehicle import wrap_angle


@dataclass(frozen=True)
class StraightLane:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def _unit(self) -> tuple[float, float]:
        n = self.length
        return (self.x1 - self.x0) / n, (self.y1 - self.y0) / n

    def point_at(self, s: float) -> tuple[float, float]:
        ux, uy = self._unit()
        return self.x0 + ux * s, self.y0 + uy * s

    def heading_at(self, s: float) -> float:
        ux, uy = self._unit()
        return math.atan2(uy, ux)

    def project(self, x: float, y: float) -> tuple[float, float, float]:
        """Project a point, returning (s, signed lateral offset, distance to path point).

        Lateral offset is positive on the left of the travel direction; s is
        clamped to [0, length].
        """
        ux, uy = self._unit()
        dx, dy = x - self.x0, y - self.y0
        s = min(max(dx * ux + dy * uy, 0.0), self.length)
        lat = ux * dy - uy * dx
        px, py = self.x0 + ux * s, self.y0 + uy * s
        dist = math.hypot(x - px, y - py)
        return s, lat, dist


@dataclass(frozen=True)
class ArcLane:
    cx: float
    cy: float
    radius: float
    start_angle: float  # rad, angle of the start point seen from the center
    sweep: float  # rad, positive = counterclockwise (left turn)

    @property
    def length(self) -> float:
        return abs(self.sweep) * self.radius

    def _angle_at(self, s: float) -> float:
        direction = 1.0 if self.sweep >= 0.0 else -1.0
        return self.start_angle + direction * s / self.radius

    def point_at(self, s: float) -> tuple[float, float]:
        a = self._angle_at(s)
        return self.cx + self.radius * math.cos(a), self.cy + self.radius * math.sin(a)

    def heading_at(self, s: float) -> float:
        a = self._angle_at(s)
        offset = math.pi / 2 if self.sweep >= 0.0 else -math.pi / 2
        return wrap_angle(a + offset)

    def project(self, x: float, y: float) -> tuple[float, float, float]:
        dx, dy = x - self.cx, y - self.cy
        phi = math.atan2(dy, dx)
        direction = 1.0 if self.sweep >= 0.0 else -1.0
        delta = wrap_angle(direction * (phi - self.start_angle))
        s = min(max(delta * self.radius, 0.0), self.length)
        d = math.hypot(dx, dy)
        # Left-positive lateral offset: an arc turning left has its center on the left.
        lat = (self.radius - d) * direction
        px, py = self.point_at(s)
        dist = math.hypot(x - px, y - py)
        return s, lat, dist


Lane = StraightLane | ArcLane


@dataclass(frozen=True)
class RoutePath:
    """Concatenation of lanes traversed from spawn to destination."""

    lane_ids: tuple[str, ...]
    lanes: tuple[Lane, ...]
    offsets: tuple[float, ...] = field(init=False)
    length: float = field(init=False)

    def __post_init__(self):
        offsets = []
        total = 0.0
        for lane in self.lanes:
            offsets.append(total)
            total += lane.length
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "length", total)

    def _locate(self, s: float) -> tuple[int, float]:
        s = min(max(s, 0.0), self.length)
        for i in range(len(self.lanes) - 1, -1, -1):
            if s >= self.offsets[i]:
                return i, s - self.offsets[i]
        return 0, 0.0

    def point_at(self, s: float) -> tuple[float, float]:
        i, local = self._locate(s)
        return self.lanes[i].point_at(local)

    def heading_at(self, s: float) -> float:
        i, local = self._locate(s)
        return self.lanes[i].heading_at(local)

    def project(self, x: float, y: float) -> tuple[float, float, float, int]:
        """Nearest point on the path: (s, lateral offset, distance, lane index)."""
        best = None
        for i, lane in enumerate(self.lanes):
            s, lat, dist = lane.project(x, y)
            if best is None or dist < best[2]:
                best = (self.offsets[i] + s, lat, dist, i)
        return best
