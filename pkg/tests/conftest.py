import dataclasses

import pytest

from intersection_rl.sim.env import EnvConfig, IntersectionEnv
from intersection_rl.sim.vehicle import VehicleState


@pytest.fixture
def env():
    return IntersectionEnv(EnvConfig())


def make_env(**overrides) -> IntersectionEnv:
    return IntersectionEnv(dataclasses.replace(EnvConfig(), **overrides))


def spawn_on(env, scene, arm, movement, progress, speed, vid) -> VehicleState:
    """Place a scripted vehicle on a route at the given progress and add it."""
    route = env.roads.route(arm, movement)
    path = env.roads.route_path(route)
    x, y = path.point_at(progress)
    vehicle = VehicleState(
        x=x,
        y=y,
        v=speed,
        psi=path.heading_at(progress),
        route=route,
        priority_rank=int(scene.priority_map[arm]),
        vid=vid,
    )
    scene.others.append(vehicle)
    return vehicle


def parked_ego_scene(env, seed=0):
    """A scene whose ego sits far from the junction and will stay stopped."""
    scene = env.reset(seed)
    scene.ego = dataclasses.replace(scene.ego, v=0.0)
    scene.ego_setpoint = 0.0
    return scene
