import math

import numpy as np
import pytest

shapely = pytest.importorskip("shapely")
from shapely.geometry import Polygon

from intersection_rl.sim.collision import check_collision, rectangle_corners
from intersection_rl.sim.vehicle import VehicleState


def vehicle(x, y, psi=0.0, length=5.0, width=2.0):
    return VehicleState(x=x, y=y, v=0.0, psi=psi, length=length, width=width)


def shapely_overlaps(a, b):
    return Polygon(rectangle_corners(a)).intersects(Polygon(rectangle_corners(b)))


def test_identical_poses_collide():
    a = vehicle(1.0, 2.0, 0.3)
    assert check_collision(a, vehicle(1.0, 2.0, 0.3))


def test_far_apart_do_not_collide():
    assert not check_collision(vehicle(0, 0), vehicle(100, 0))


def test_rotated_pair_matches_polygon_oracle():
    a = vehicle(0.0, 0.0, 0.0)
    b = vehicle(3.0, 0.0, math.pi / 4)
    assert check_collision(a, b) == shapely_overlaps(a, b)


def test_random_pairs_match_polygon_oracle():
    rng = np.random.default_rng(7)
    for _ in range(500):
        a = vehicle(*rng.uniform(-4, 4, 2), psi=rng.uniform(-math.pi, math.pi))
        b = vehicle(*rng.uniform(-4, 4, 2), psi=rng.uniform(-math.pi, math.pi))
        assert check_collision(a, b) == shapely_overlaps(a, b), (a, b)


def test_symmetry_property():
    rng = np.random.default_rng(11)
    for _ in range(300):
        a = vehicle(*rng.uniform(-6, 6, 2), psi=rng.uniform(-math.pi, math.pi))
        b = vehicle(*rng.uniform(-6, 6, 2), psi=rng.uniform(-math.pi, math.pi))
        assert check_collision(a, b) == check_collision(b, a)


def test_near_miss_separated_rectangles():
    # parallel vehicles in adjacent lanes: 4 m apart, 2 m wide
    assert not check_collision(vehicle(0, 0), vehicle(0, 4.0))
    assert check_collision(vehicle(0, 0), vehicle(0, 1.9))
