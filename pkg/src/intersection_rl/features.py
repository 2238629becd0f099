"""Scene encodings: per-vehicle feature rows, padded lists, and occupancy grids.

All encodings share one 7-value layout per vehicle:
(presence, x, y, vx, vy, cos psi, sin psi), positions relative to the ego and
normalized by fixed ranges, velocities in absolute world-frame components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim.env import Scene
from .sim.vehicle import VehicleState

FEATURE_DIM = 7
LIST_ROWS = 15  # ego + up to 14 others when padded
GRID_CELLS = 32
GRID_CELL_SIZE = 2.0  # m per cell


@dataclass(frozen=True)
class FeatureRanges:
    position: float = 100.0  # m
    speed: float = 20.0  # m/s

    def validate(self) -> None:
        if self.position <= 0 or self.speed <= 0:
            raise ValueError("feature ranges must be strictly positive")


def feature_row(
    vehicle: VehicleState, ego: VehicleState, ranges: FeatureRanges = FeatureRanges()
) -> np.ndarray:
    """7-value descriptor of one vehicle, positions taken relative to the ego."""
    ranges.validate()
    vx, vy = vehicle.velocity()
    row = np.array(
        [
            1.0,
            (vehicle.x - ego.x) / ranges.position,
            (vehicle.y - ego.y) / ranges.position,
            vx / ranges.speed,
            vy / ranges.speed,
            math.cos(vehicle.psi),
            math.sin(vehicle.psi),
        ]
    )
    row[1:5] = np.clip(row[1:5], -1.0, 1.0)
    return row


def sorted_others(scene: Scene) -> list[VehicleState]:
    """Canonical ordering: increasing distance to the ego, ties broken by vid."""
    ego = scene.ego
    return sorted(scene.others, key=lambda v: (math.hypot(v.x - ego.x, v.y - ego.y), v.vid))


def list_observation(
    scene: Scene, pad: bool, ranges: FeatureRanges = FeatureRanges()
) -> tuple[np.ndarray, list[int]]:
    """Feature-row matrix with the ego first; returns (rows, vehicle ids per row).

    Padded output is always LIST_ROWS x 7 with all-zero rows (presence 0) after
    the real vehicles; unpadded output is (1 + N) x 7.
    """
    others = sorted_others(scene)
    if pad and len(others) > LIST_ROWS - 1:
        raise ValueError(f"cannot pad more than {LIST_ROWS - 1} vehicles")
    n_rows = LIST_ROWS if pad else 1 + len(others)
    rows = np.zeros((n_rows, FEATURE_DIM))
    rows[0] = feature_row(scene.ego, scene.ego, ranges)
    for i, vehicle in enumerate(others, start=1):
        rows[i] = feature_row(vehicle, scene.ego, ranges)
    return rows, [scene.ego.vid] + [v.vid for v in others]


def grid_observation(scene: Scene, ranges: FeatureRanges = FeatureRanges()) -> np.ndarray:
    """Ego-centered occupancy grid, GRID_CELLS^2 cells of GRID_CELL_SIZE metres.

    Channels match feature_row. When two vehicles fall into one cell the one
    nearer the ego wins; the ego always holds the central cell.
    """
    half = GRID_CELLS * GRID_CELL_SIZE / 2.0
    grid = np.zeros((GRID_CELLS, GRID_CELLS, FEATURE_DIM))
    ego = scene.ego
    # Farthest first, so nearer vehicles overwrite shared cells.
    for vehicle in reversed(sorted_others(scene)):
        dx, dy = vehicle.x - ego.x, vehicle.y - ego.y
        gx = math.floor((dx + half) / GRID_CELL_SIZE)
        gy = math.floor((dy + half) / GRID_CELL_SIZE)
        if 0 <= gx < GRID_CELLS and 0 <= gy < GRID_CELLS:
            grid[gx, gy] = feature_row(vehicle, ego, ranges)
    center = GRID_CELLS // 2
    grid[center, center] = feature_row(ego, ego, ranges)
    return grid
