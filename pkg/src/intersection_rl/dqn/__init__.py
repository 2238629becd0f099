from .replay import ReplayBuffer, Transition
from .trainer import (
    Adam,
    EpsilonSchedule,
    EvalSummary,
    TrainConfig,
    encode_observation,
    epsilon,
    evaluate,
    run_training,
    select_action,
    td_targets,
    train_step,
)

__all__ = [
    "ReplayBuffer",
    "Transition",
    "Adam",
    "EpsilonSchedule",
    "EvalSummary",
    "TrainConfig",
    "encode_observation",
    "epsilon",
    "evaluate",
    "run_training",
    "select_action",
    "td_targets",
    "train_step",
]
