"""Intersection-crossing MDP: seeded resets, decision-rate stepping, reward."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from ..errors import ConfigError, UsageError
from .collision import check_collision
from .driver import IdmParams, Lead, SteeringGains, idm_acceleration, steering_from_error
from .lanes import ArcLane, RoutePath
from .road import ARM_ORDER, MOVEMENTS, RoadNetwork
from .vehicle import VehicleState, bicycle_step
from .yielding import PredictionParams, resolve_yielding


class EgoAction(IntEnum):
    SLOWER = 0
    NOOP = 1
    FASTER = 2


@dataclass(frozen=True)
class EnvConfig:
    # Traffic
    vehicles_min: int = 3
    vehicles_max: int = 12
    max_vehicles: int = 14  # hard cap on N, matches the padded observation size
    spawn_max_progress: float = 50.0  # m along the approach where traffic may start
    spawn_spacing: float = 8.0  # m minimum same-arm spacing at reset
    spawn_speed_min: float = 4.5  # m/s
    spawn_speed_max: float = 9.0  # m/s
    # Ego
    ego_arm: str = "south"
    ego_destination: str = "left"
    ego_priority: bool = False  # ego's road is the priority road
    ego_start_gap: float = 30.0  # m before the conflict zone at reset
    ego_start_speed: float = 4.5  # m/s, also the initial speed setpoint
    ego_accel_limit: float = 5.0  # m/s^2
    speed_gain: float = 4.0  # proportional setpoint tracking, 1/s
    setpoint_step: float = 4.5  # m/s change per SLOWER/FASTER action
    # Reward
    v_max: float = 9.0  # m/s, full-speed reward threshold
    speed_tolerance: float = 0.1  # m/s below v_max still counts as full speed
    # Timing
    dt: float = 1.0 / 15.0  # s physics step
    policy_period: float = 1.0  # s per decision
    horizon: int = 13  # decisions per episode
    # Geometry / termination
    lane_width: float = 4.0
    approach_length: float = 60.0
    zone_half: float = 12.0
    arrival_distance: float = 20.0  # m past the conflict zone that counts as "crossed"
    # Scripted behaviour
    idm: IdmParams = field(default_factory=IdmParams)
    steering: SteeringGains = field(default_factory=SteeringGains)
    prediction: PredictionParams = field(default_factory=PredictionParams)
    turn_lateral_accel: float = 2.0  # m/s^2 comfort bound setting curve speeds

    def validate(self) -> None:
        if self.vehicles_min < 0:
            raise ConfigError(f"vehicles_min must be >= 0, got {self.vehicles_min}")
        if self.vehicles_max < self.vehicles_min:
            raise ConfigError("vehicles_max must be >= vehicles_min")
        if self.vehicles_max > self.max_vehicles:
            raise ConfigError(
                f"vehicles_max must be <= {self.max_vehicles}, got {self.vehicles_max}"
            )
        if self.lane_width <= 0:
            raise ConfigError("lane_width must be positive")
        if self.approach_length <= 0:
            raise ConfigError("approach_length must be positive")
        if self.ego_arm not in ARM_ORDER:
            raise ConfigError(f"ego_arm must be one of {ARM_ORDER}, got {self.ego_arm!r}")
        if self.ego_destination not in MOVEMENTS:
            raise ConfigError(
                f"ego_destination must be one of {MOVEMENTS}, got {self.ego_destination!r}"
            )
        if self.horizon < 1:
            raise ConfigError("horizon must be at least one decision")


@dataclass
class Scene:
    ego: VehicleState
    others: list[VehicleState]
    time: float  # s, tick * dt
    roads: RoadNetwork
    priority_map: dict[str, bool]  # arm -> on the priority road
    ego_setpoint: float  # m/s, tracked speed target
    tick: int = 0  # physics steps since reset

    def copy(self) -> "Scene":
        return replace(self, ego=self.ego.copy(), others=[v.copy() for v in self.others])


@dataclass(frozen=True)
class StepOutcome:
    next_scene: Scene
    reward: float
    terminal: bool
    crashed: bool
    arrived: bool


def compute_reward(crashed: bool, speed: float, v_max: float, tolerance: float = 0.1) -> float:
    """-5 on collision, 1 at full speed, 0 otherwise."""
    if crashed:
        return -5.0
    return 1.0 if speed >= v_max - tolerance else 0.0


class TrajectoryRecorder:
    """Collects one row per vehicle per physics step for the scenario log."""

    COLUMNS = ("time", "vehicle_id", "x", "y", "v", "psi", "is_ego", "braking_flag")

    def __init__(self):
        self.rows: list[tuple] = []

    def snapshot(self, scene: Scene, braking: set[int] = frozenset()) -> None:
        for vehicle in (scene.ego, *scene.others):
            self.rows.append(
                (
                    scene.time,
                    vehicle.vid,
                    vehicle.x,
                    vehicle.y,
                    vehicle.v,
                    vehicle.psi,
                    int(vehicle is scene.ego),
                    int(vehicle.vid in braking),
                )
            )

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.COLUMNS)
            for row in self.rows:
                writer.writerow([f"{v:.9g}" if isinstance(v, float) else v for v in row])


class IntersectionEnv:
    """Deterministic (per seed) four-way intersection simulator."""

    def __init__(self, config: EnvConfig = EnvConfig()):
        config.validate()
        self.config = config
        self.roads = RoadNetwork(
            lane_width=config.lane_width,
            approach_length=config.approach_length,
            zone_half=config.zone_half,
        )
        self.substeps = int(round(config.policy_period / config.dt))
        self.horizon_time = config.horizon * config.policy_period

    # ------------------------------------------------------------------ reset

    def reset(self, seed: int) -> Scene:
        cfg = self.config
        rng = np.random.default_rng(seed)
        priority_road = RoadNetwork.road_of(cfg.ego_arm) if cfg.ego_priority else self._cross_road()
        priority_map = {arm: RoadNetwork.road_of(arm) == priority_road for arm in ARM_ORDER}

        ego_route = self.roads.route(cfg.ego_arm, cfg.ego_destination)
        ego_path = self.roads.route_path(ego_route)
        s0 = cfg.approach_length - cfg.ego_start_gap
        x, y = ego_path.point_at(s0)
        ego = VehicleState(
            x=x,
            y=y,
            v=cfg.ego_start_speed,
            psi=ego_path.heading_at(s0),
            route=ego_route,
            priority_rank=int(priority_map[cfg.ego_arm]),
            vid=0,
        )

        others: list[VehicleState] = []
        count = int(rng.integers(cfg.vehicles_min, cfg.vehicles_max + 1))
        count = min(count, cfg.max_vehicles)
        for vid in range(1, count + 1):
            spawned = self._spawn_one(rng, vid, priority_map, [ego, *others])
            if spawned is not None:
                others.append(spawned)
        return Scene(
            ego=ego,
            others=others,
            time=0.0,
            roads=self.roads,
            priority_map=priority_map,
            ego_setpoint=cfg.ego_start_speed,
        )

    def _cross_road(self) -> str:
        return "ew" if RoadNetwork.road_of(self.config.ego_arm) == "ns" else "ns"

    def _spawn_one(self, rng, vid, priority_map, existing) -> VehicleState | None:
        cfg = self.config
        for _ in range(200):
            arm = ARM_ORDER[int(rng.integers(len(ARM_ORDER)))]
            movement = MOVEMENTS[int(rng.integers(len(MOVEMENTS)))]
            progress = float(rng.uniform(0.0, cfg.spawn_max_progress))
            speed = float(rng.uniform(cfg.spawn_speed_min, cfg.spawn_speed_max))
            route = self.roads.route(arm, movement)
            path = self.roads.route_path(route)
            px, py = path.point_at(progress)
            candidate = VehicleState(
                x=px,
                y=py,
                v=speed,
                psi=path.heading_at(progress),
                route=route,
                priority_rank=int(priority_map[arm]),
                vid=vid,
            )
            if self._spawn_clear(candidate, arm, progress, existing):
                return candidate
        return None

    def _spawn_clear(self, candidate, arm, progress, existing) -> bool:
        for other in existing:
            if other.route and other.route[0] == f"in:{arm}":
                other_s = self.roads.route_path(other.route).project(other.x, other.y)[0]
                if abs(other_s - progress) < self.config.spawn_spacing:
                    return False
            if check_collision(candidate, other):
                return False
        return True

    # ------------------------------------------------------------------- step

    def scene_status(self, scene: Scene) -> tuple[bool, bool, bool]:
        """(crashed, arrived, timed_out) for the scene as it stands."""
        crashed = any(check_collision(scene.ego, other) for other in scene.others)
        ego_s = self._ego_progress(scene)
        arrived = ego_s >= self._arrival_progress(scene)
        timed_out = scene.time >= self.horizon_time - 1e-9
        return crashed, arrived, timed_out

    def _ego_progress(self, scene: Scene) -> float:
        path = self.roads.route_path(scene.ego.route)
        return path.project(scene.ego.x, scene.ego.y)[0]

    def _arrival_progress(self, scene: Scene) -> float:
        path = self.roads.route_path(scene.ego.route)
        return path.offsets[-1] + self.config.arrival_distance

    def step(
        self, scene: Scene, action: EgoAction, recorder: TrajectoryRecorder | None = None
    ) -> StepOutcome:
        crashed, arrived, timed_out = self.scene_status(scene)
        if crashed or arrived or timed_out:
            raise UsageError("cannot step a terminal scene")

        cfg = self.config
        current = scene.copy()
        if action == EgoAction.SLOWER:
            current.ego_setpoint = max(0.0, current.ego_setpoint - cfg.setpoint_step)
        elif action == EgoAction.FASTER:
            current.ego_setpoint = min(cfg.v_max, current.ego_setpoint + cfg.setpoint_step)

        for _ in range(self.substeps):
            braking = self._advance_substep(current, recorder)
            crashed = any(check_collision(current.ego, other) for other in current.others)
            if crashed:
                break
            if self._ego_progress(current) >= self._arrival_progress(current):
                arrived = True
                break

        timed_out = current.time >= self.horizon_time - 1e-9
        reward = compute_reward(crashed, current.ego.v, cfg.v_max, cfg.speed_tolerance)
        terminal = crashed or arrived or timed_out
        return StepOutcome(current, reward, terminal, crashed, arrived)

    def _advance_substep(self, scene: Scene, recorder) -> set[int]:
        cfg = self.config
        vehicles = [scene.ego, *scene.others]
        paths = {v.vid: self.roads.route_path(v.route) for v in vehicles}
        proj = {v.vid: paths[v.vid].project(v.x, v.y) for v in vehicles}

        # Retire scripted vehicles that completed their route.
        done = [v for v in scene.others if proj[v.vid][0] >= paths[v.vid].length - 0.5]
        if done:
            scene.others = [v for v in scene.others if v not in done]
            vehicles = [scene.ego, *scene.others]

        desired = {scene.ego.vid: scene.ego_setpoint}
        for vehicle in scene.others:
            s, _, _, lane_idx = proj[vehicle.vid]
            desired[vehicle.vid] = self._scripted_desired_speed(paths[vehicle.vid], s, lane_idx)
        braking = resolve_yielding(scene, cfg.prediction, intent_speeds=desired)

        controls: dict[int, tuple[float, float]] = {}
        for vehicle in vehicles:
            path = paths[vehicle.vid]
            s, lat, _, _ = proj[vehicle.vid]
            steering = steering_from_error(lat, path.heading_at(s), vehicle.psi, cfg.steering)
            if vehicle is scene.ego:
                accel = cfg.speed_gain * (scene.ego_setpoint - vehicle.v)
                accel = min(max(accel, -cfg.ego_accel_limit), cfg.ego_accel_limit)
            elif vehicle.vid in braking:
                accel = -cfg.idm.b_max
            else:
                leader = self._find_leader(vehicle, scene, paths, proj)
                accel = idm_acceleration(vehicle, leader, cfg.idm, desired[vehicle.vid])
            controls[vehicle.vid] = (accel, steering)

        scene.ego = bicycle_step(scene.ego, *controls[scene.ego.vid], cfg.dt)
        scene.others = [bicycle_step(v, *controls[v.vid], cfg.dt) for v in scene.others]
        scene.tick += 1
        scene.time = scene.tick * cfg.dt
        if recorder is not None:
            recorder.snapshot(scene, braking)
        return braking

    def _scripted_desired_speed(self, path: "RoutePath", s: float, lane_idx: int) -> float:
        """Desired speed capped by curve comfort, anticipating upcoming arcs."""
        cfg = self.config
        limit = cfg.idm.v0
        for i in range(lane_idx, len(path.lanes)):
            lane = path.lanes[i]
            if not isinstance(lane, ArcLane):
                continue
            curve_speed = math.sqrt(cfg.turn_lateral_accel * lane.radius)
            if i == lane_idx:
                limit = min(limit, curve_speed)
            else:
                distance = max(path.offsets[i] - s, 0.0)
                limit = min(limit, math.sqrt(curve_speed**2 + 2.0 * cfg.idm.b * distance))
        return limit

    # A stopped vehicle cannot yield any further, so scripted traffic treats it
    # as an obstacle to stop behind even when it sits off-lane or has priority.
    OBSTACLE_SPEED = 1.0  # m/s
    OBSTACLE_LATERAL = 3.5  # m from the path centerline
    OBSTACLE_RANGE = 25.0  # m lookahead along the path

    def _find_leader(self, vehicle, scene, paths, proj) -> Lead | None:
        """Nearest vehicle ahead on the follower's remaining lanes, or a
        slow-moving obstruction close to its remaining path."""
        path = paths[vehicle.vid]
        s_self, _, _, lane_idx = proj[vehicle.vid]
        remaining = {
            lane_id: path.offsets[i]
            for i, lane_id in enumerate(path.lane_ids)
            if i >= lane_idx
        }
        best: Lead | None = None
        best_gap = math.inf

        def consider(gap: float, speed: float):
            nonlocal best, best_gap
            if gap < best_gap:
                best_gap = gap
                best = Lead(gap=max(gap, 0.5), speed=speed)

        for other in (scene.ego, *scene.others):
            if other is vehicle:
                continue
            other_path = paths[other.vid]
            s_other, _, _, other_idx = proj[other.vid]
            lane_id = other_path.lane_ids[other_idx]
            if lane_id in remaining:
                s_on_mine = remaining[lane_id] + (s_other - other_path.offsets[other_idx])
                if s_on_mine > s_self:
                    consider(s_on_mine - s_self - (vehicle.length + other.length) / 2.0, other.v)

        for other in scene.others:
            if other is vehicle or other.v >= self.OBSTACLE_SPEED:
                continue
            s_obs, lat, _, _ = path.project(other.x, other.y)
            ahead = s_obs - s_self
            if 0.0 < ahead <= self.OBSTACLE_RANGE and abs(lat) < self.OBSTACLE_LATERAL:
                consider(ahead - (vehicle.length + other.length) / 2.0, other.v)
        return best
