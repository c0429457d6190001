import os
from typing import Any, Dict, List, Type, Union, get_args, get_origin

import json5

from ..errors import ConfigError
from .run_config import RunConfig, check_keys
from .variables.base import BaseConfig
from .variables.default import DEFAULT_CONFIG

ENV_PREFIX = "MLMSDA_"


class Config:
    """Flat run configuration: defaults, then a JSON/JSON5 file, then ``MLMSDA_*`` env vars."""

    CONFIG_DIR = os.path.join(os.path.dirname(__file__), "variables")

    def __init__(self, config_path: str | None = None):
        self.config_path = config_path
        self.values: Dict[str, Any] = {}
        config_to_use = self.load_config(config_path)
        self._set_attributes(config_to_use)

    def _set_attributes(self, config: Dict[str, Any]) -> None:
        for key, value in config.items():
            env_value = os.getenv(ENV_PREFIX + key)
            if env_value is not None:
                try:
                    value = self.convert_env_value(key, env_value, BaseConfig.__annotations__[key])
                except ValueError as exc:
                    raise ConfigError(f"{ENV_PREFIX}{key}: {exc}") from exc
            self.values[key] = value
            setattr(self, key.lower(), value)

    @property
    def run_config(self) -> RunConfig:
        return RunConfig.from_flat(self.values)

    @classmethod
    def resolve_path(cls, config_path: str) -> str:
        """A file path, or the name of a config shipped in ``variables/``."""
        if os.path.exists(config_path):
            return config_path
        bundled = os.path.join(cls.CONFIG_DIR, f"{config_path.removesuffix('.json')}.json")
        if os.path.exists(bundled):
            return bundled
        hint = "" if config_path.endswith(".json") else f" Do you mean '{config_path}.json'?"
        raise ConfigError(f"configuration not found at '{config_path}'.{hint}")

    @classmethod
    def load_config(cls, config_path: str | None) -> Dict[str, Any]:
        """Load a configuration by path or name, merged over the defaults."""
        if config_path is None or config_path == "default":
            return dict(DEFAULT_CONFIG)

        with open(cls.resolve_path(config_path), "r", encoding="utf-8") as f:
            try:
                custom_config = json5.load(f)
            except ValueError as exc:
                raise ConfigError(f"cannot parse '{config_path}': {exc}") from exc
        if not isinstance(custom_config, dict):
            raise ConfigError(f"'{config_path}' must hold a JSON object")
        check_keys(custom_config)

        merged_config = dict(DEFAULT_CONFIG)
        merged_config.update(custom_config)
        return merged_config

    @classmethod
    def list_available_configs(cls) -> List[str]:
        """List all available configuration names."""
        configs = ["default"]
        for file in sorted(os.listdir(cls.CONFIG_DIR)):
            if file.endswith(".json"):
                configs.append(file[:-5])
        return configs

    @staticmethod
    def convert_env_value(key: str, env_value: str, type_hint: Type) -> Any:
        """Convert environment variable to the appropriate type based on the type hint."""
        origin = get_origin(type_hint)
        args = get_args(type_hint)

        if origin is Union:
            for arg in args:
                if arg is type(None):
                    if env_value.lower() in ("none", "null", ""):
                        return None
                else:
                    try:
                        return Config.convert_env_value(key, env_value, arg)
                    except ValueError:
                        continue
            raise ValueError(f"Cannot convert {env_value} to any of {args}")

        if type_hint is bool:
            return env_value.lower() in ("true", "1", "yes", "on")
        elif type_hint is int:
            return int(env_value)
        elif type_hint is float:
            return float(env_value)
        elif type_hint in (str, Any):
            return env_value
        elif origin is list or origin is List or type_hint is dict:
            return json5.loads(env_value)
        else:
            raise ValueError(f"Unsupported type {type_hint} for key {key}")
