from .enum import ConditioningMode, InferenceMode, MutualDivergence, VariantName
from .logger import get_formatted_logger
from .validators import (
    AblationFlags,
    ArchConfig,
    DatasetConfig,
    DomainSpec,
    HyperParams,
    OptimizerConfig,
)
from .workers import WorkerPool, resolve_max_workers

__all__ = [
    "AblationFlags",
    "ArchConfig",
    "ConditioningMode",
    "DatasetConfig",
    "DomainSpec",
    "HyperParams",
    "InferenceMode",
    "MutualDivergence",
    "OptimizerConfig",
    "VariantName",
    "WorkerPool",
    "get_formatted_logger",
    "resolve_max_workers",
]
