from .vehicle import VehicleState, bicycle_step, predict_positions, wrap_angle
from .collision import check_collision
from .driver import IdmParams, SteeringGains, idm_acceleration, steering_for_route
from .yielding import PredictionParams, resolve_yielding
from .road import RoadNetwork
from .env import (
    EgoAction,
    EnvConfig,
    IntersectionEnv,
    Scene,
    StepOutcome,
    TrajectoryRecorder,
    compute_reward,
)

__all__ = [
    "VehicleState",
    "bicycle_step",
    "predict_positions",
    "wrap_angle",
    "check_collision",
    "IdmParams",
    "SteeringGains",
    "idm_acceleration",
    "steering_for_route",
    "PredictionParams",
    "resolve_yielding",
    "RoadNetwork",
    "EgoAction",
    "EnvConfig",
    "IntersectionEnv",
    "Scene",
    "StepOutcome",
    "TrajectoryRecorder",
    "compute_reward",
]
