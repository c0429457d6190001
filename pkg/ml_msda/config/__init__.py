from .config import ENV_PREFIX, Config
from .run_config import FLAT_FIELDS, SOURCE_ONLY_OVERRIDES, UNHASHED_KEYS, RunConfig
from .variables.base import BaseConfig
from .variables.default import DEFAULT_CONFIG as DefaultConfig

__all__ = [
    "BaseConfig",
    "Config",
    "DefaultConfig",
    "ENV_PREFIX",
    "FLAT_FIELDS",
    "RunConfig",
    "SOURCE_ONLY_OVERRIDES",
    "UNHASHED_KEYS",
]
