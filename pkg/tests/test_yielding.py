import math

from conftest import make_env, parked_ego_scene, spawn_on

from intersection_rl.sim.env import Scene
from intersection_rl.sim.vehicle import VehicleState
from intersection_rl.sim.yielding import resolve_yielding


def empty_scene(env):
    scene = parked_ego_scene(env)
    scene.others = []
    return scene


def test_empty_and_single_vehicle_scenes():
    env = make_env(vehicles_min=0, vehicles_max=0)
    scene = empty_scene(env)
    assert resolve_yielding(scene) == set()
    spawn_on(env, scene, "west", "straight", progress=30.0, speed=8.0, vid=1)
    # the parked far-away ego and one moving vehicle: no conflicting pair
    assert resolve_yielding(scene) == set()


def test_crossing_pair_non_priority_brakes():
    env = make_env(vehicles_min=0, vehicles_max=0)
    scene = empty_scene(env)
    # priority road is east-west by default; both 8 m before the conflict zone,
    # reaching the crossing point within the 3 s prediction horizon
    priority = spawn_on(env, scene, "west", "straight", progress=52.0, speed=8.0, vid=1)
    minor = spawn_on(env, scene, "south", "straight", progress=52.0, speed=8.0, vid=2)
    assert priority.priority_rank == 1
    assert minor.priority_rank == 0
    assert resolve_yielding(scene) == {2}


def test_same_priority_equidistant_lower_id_brakes():
    env = make_env(vehicles_min=0, vehicles_max=0)
    scene = empty_scene(env)
    # hand-built head-on pair, identical rank, equidistant from the center
    a = VehicleState(x=-10.0, y=0.0, v=6.0, psi=0.0, priority_rank=0, vid=3)
    b = VehicleState(x=10.0, y=0.0, v=6.0, psi=math.pi, priority_rank=0, vid=7)
    scene.others = [a, b]
    assert resolve_yielding(scene) == {3}


def test_same_priority_farther_vehicle_brakes():
    env = make_env(vehicles_min=0, vehicles_max=0)
    scene = empty_scene(env)
    near = VehicleState(x=-8.0, y=0.0, v=6.0, psi=0.0, priority_rank=0, vid=1)
    far = VehicleState(x=14.0, y=0.0, v=6.0, psi=math.pi, priority_rank=0, vid=2)
    scene.others = [near, far]
    assert resolve_yielding(scene) == {2}


def test_ego_never_in_braking_set():
    env = make_env(vehicles_min=0, vehicles_max=0)
    scene = empty_scene(env)
    # ego moving at speed toward a priority vehicle's crossing path
    ego_route = env.roads.route("south", "straight")
    path = env.roads.route_path(ego_route)
    x, y = path.point_at(40.0)
    scene.ego = VehicleState(
        x=x, y=y, v=8.0, psi=path.heading_at(40.0), route=ego_route, priority_rank=0, vid=0
    )
    scene.ego_setpoint = 8.0
    spawn_on(env, scene, "west", "straight", progress=40.0, speed=8.0, vid=1)
    braking = resolve_yielding(scene)
    assert 0 not in braking
    # the scripted vehicle has priority, so it does not brake either
    assert braking == set()


def test_scripted_yields_to_priority_ego():
    env = make_env(vehicles_min=0, vehicles_max=0, ego_priority=True)
    scene = empty_scene(env)
    ego_route = env.roads.route("south", "straight")
    path = env.roads.route_path(ego_route)
    x, y = path.point_at(50.0)
    scene.ego = VehicleState(
        x=x, y=y, v=8.0, psi=path.heading_at(50.0), route=ego_route, priority_rank=1, vid=0
    )
    scene.ego_setpoint = 8.0
    crossing = spawn_on(env, scene, "west", "straight", progress=50.0, speed=8.0, vid=1)
    assert crossing.priority_rank == 0
    assert resolve_yielding(scene) == {1}


def test_intent_speed_floor_keeps_stopped_yielder_braking():
    env = make_env(vehicles_min=0, vehicles_max=0)
    scene = empty_scene(env)
    # a stopped minor-road vehicle at the zone edge, priority traffic incoming
    stopped = spawn_on(env, scene, "south", "straight", progress=59.0, speed=0.0, vid=1)
    spawn_on(env, scene, "west", "straight", progress=60.0, speed=9.0, vid=2)
    assert resolve_yielding(scene) == set()  # a point prediction sees no conflict
    assert resolve_yielding(scene, intent_speeds={1: 9.0}) == {1}
