from .metrics import MetricsRecord
from .optimizer import DEFAULT_SCHEDULE, MomentumSGD, OptimState, lr_at
from .trainer import (
    TrainResult,
    adv_scale_at,
    epoch_record,
    resolve_arch,
    run_training,
    source_only_config,
    train,
    train_step,
)

__all__ = [
    "DEFAULT_SCHEDULE",
    "MetricsRecord",
    "MomentumSGD",
    "OptimState",
    "TrainResult",
    "adv_scale_at",
    "epoch_record",
    "lr_at",
    "resolve_arch",
    "run_training",
    "source_only_config",
    "train",
    "train_step",
]
