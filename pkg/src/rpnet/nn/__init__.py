"""Trainable feedforward stack: standard and random-projection layers."""

from .checkpoint import load_checkpoint, read_header, save_checkpoint
from .gradcheck import battery_nets, grad_check, grad_check_battery
from .loss import mse_loss, softmax_cross_entropy
from .network import (
    BatchNormSpec,
    ConvSpec,
    DenseSpec,
    FlattenSpec,
    MaxPoolSpec,
    NetworkSpec,
    ReluSpec,
    RpConvIISpec,
    RpConvISpec,
    RpDenseSpec,
    backward,
    forward,
    init_params,
    trainable_items,
)
from .optim import (
    HALVE_EVERY,
    adam_step,
    init_adam_state,
    init_sgd_state,
    lr_at,
    sgd_momentum_step,
)
from .train import EpochRecord, TrainConfig, TrainReport, top1_error, train

__all__ = [
    "BatchNormSpec",
    "ConvSpec",
    "DenseSpec",
    "EpochRecord",
    "FlattenSpec",
    "HALVE_EVERY",
    "MaxPoolSpec",
    "NetworkSpec",
    "ReluSpec",
    "RpConvIISpec",
    "RpConvISpec",
    "RpDenseSpec",
    "TrainConfig",
    "TrainReport",
    "adam_step",
    "backward",
    "battery_nets",
    "forward",
    "grad_check",
    "grad_check_battery",
    "init_adam_state",
    "init_params",
    "init_sgd_state",
    "load_checkpoint",
    "lr_at",
    "mse_loss",
    "read_header",
    "save_checkpoint",
    "sgd_momentum_step",
    "softmax_cross_entropy",
    "top1_error",
    "train",
    "trainable_items",
]
