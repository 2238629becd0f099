from .autodiff import Tensor, no_grad, parameter, softmax
from .networks import (
    AttentionHeadParams,
    EgoAttentionParams,
    EgoAttentionQNet,
    FullyConnectedQNet,
    GridConvQNet,
    QNetwork,
    attention_head,
    build_model,
    ego_attention_forward,
    load_checkpoint,
    masked_batch_forward,
    save_checkpoint,
)

__all__ = [
    "Tensor",
    "no_grad",
    "parameter",
    "softmax",
    "AttentionHeadParams",
    "EgoAttentionParams",
    "EgoAttentionQNet",
    "FullyConnectedQNet",
    "GridConvQNet",
    "QNetwork",
    "attention_head",
    "build_model",
    "ego_attention_forward",
    "load_checkpoint",
    "masked_batch_forward",
    "save_checkpoint",
]
