import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import json5
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import ConfigError
from ..utils.enum import ConditioningMode
from ..utils.validators import AblationFlags, ArchConfig, DatasetConfig, HyperParams, OptimizerConfig
from .variables.default import DEFAULT_CONFIG

# Flat key -> (section, field). Section None means a top-level RunConfig field.
FLAT_FIELDS: dict[str, tuple[Optional[str], str]] = {
    "BENCHMARK": ("dataset", "benchmark"),
    "DATASET_PATH": ("dataset", "path"),
    "NUM_CLASSES": ("dataset", "num_classes"),
    "SOURCE_ROTATIONS": ("dataset", "source_rotations"),
    "TARGET_ROTATION": ("dataset", "target_rotation"),
    "TRANSLATIONS": ("dataset", "translations"),
    "NOISE_SIGMA": ("dataset", "noise_sigma"),
    "TRAIN_SIZE": ("dataset", "train_size"),
    "TEST_SIZE": ("dataset", "test_size"),
    "DATA_SEED": ("dataset", "seed"),
    "EQUAL_DOMAIN_SAMPLING": ("dataset", "equal_domain_sampling"),
    "INPUT_DIM": ("arch", "input_dim"),
    "TRUNK_LAYERS": ("arch", "trunk_layers"),
    "PRIVATE_LAYERS": ("arch", "private_layers"),
    "FEATURE_DIM": ("arch", "feature_dim"),
    "DISCRIMINATOR_LAYERS": ("arch", "discriminator_layers"),
    "SHARE_TRUNK": ("arch", "share_trunk"),
    "CONDITIONING": ("arch", "conditioning"),
    "DETACH_PREDS": ("arch", "detach_preds"),
    "ALPHA": ("hp", "alpha"),
    "BETA": ("hp", "beta"),
    "LAMBDA": ("hp", "lambda_"),
    "MUTUAL_DIVERGENCE": ("hp", "mutual_divergence"),
    "FREEZE_GUIDANCE": ("hp", "freeze_guidance"),
    "NO_CONDITION_ADV": ("flags", "no_condition_adv"),
    "NO_ENTROPY": ("flags", "no_entropy"),
    "NO_MUTUAL": ("flags", "no_mutual"),
    "INFERENCE_MODE": ("flags", "inference_mode"),
    "EPOCHS": ("optimizer", "epochs"),
    "BATCH_SIZE": ("optimizer", "batch_size"),
    "MOMENTUM": ("optimizer", "momentum"),
    "LR_SCHEDULE": ("optimizer", "lr_schedule"),
    "ADV_WARMUP": ("optimizer", "adv_warmup"),
    "PROBE_INTERVAL": (None, "probe_interval"),
    "PROBE_SIZE": (None, "probe_size"),
    "SEED": (None, "seed"),
    "OUTPUT_DIR": (None, "output_dir"),
    "CHECKPOINT_EVERY": (None, "checkpoint_every"),
    "MAX_WORKERS": (None, "max_workers"),
    "VERBOSE": (None, "verbose"),
}

# Where a run is written and how fast it goes do not change what it computes.
UNHASHED_KEYS = frozenset({"OUTPUT_DIR", "MAX_WORKERS", "VERBOSE"})

# Same architecture and schedule with every adaptation term off, scored on the guidance network.
SOURCE_ONLY_OVERRIDES: dict[str, Any] = {
    "ALPHA": 0.0,
    "BETA": 0.0,
    "LAMBDA": 0.0,
    "INFERENCE_MODE": "guidance_only",
}


def check_keys(flat: dict[str, Any]) -> None:
    unknown = sorted(set(flat) - set(FLAT_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, Enum):
        return value.value
    return value


class RunConfig(BaseModel):
    """Everything that determines one experiment."""

    model_config = ConfigDict(frozen=True)

    arch: ArchConfig
    hp: HyperParams = HyperParams()
    flags: AblationFlags = AblationFlags()
    optimizer: OptimizerConfig = OptimizerConfig()
    dataset: DatasetConfig = DatasetConfig()
    seed: int = Field(0, ge=0)
    output_dir: str = "./outputs"
    checkpoint_every: int = Field(0, ge=0)
    probe_interval: int = Field(0, ge=0)
    probe_size: int = Field(200, ge=4)
    max_workers: int = Field(1, ge=1)
    verbose: bool = True

    @classmethod
    def from_flat(cls, flat: dict[str, Any]) -> "RunConfig":
        """Build from flat UPPER_CASE keys; missing keys take their defaults."""
        check_keys(flat)
        merged = {**DEFAULT_CONFIG, **flat}
        sections: dict[Optional[str], dict[str, Any]] = {
            None: {}, "arch": {}, "hp": {}, "flags": {}, "optimizer": {}, "dataset": {},
        }
        for key, (section, name) in FLAT_FIELDS.items():
            sections[section][name] = merged[key]

        arch = sections["arch"]
        arch["num_classes"] = merged["NUM_CLASSES"]
        arch["num_sources"] = len(merged["SOURCE_ROTATIONS"] or [])
        if merged["NO_CONDITION_ADV"]:
            arch["conditioning"] = ConditioningMode.Unconditioned.value

        try:
            return cls(
                arch=ArchConfig(**arch),
                hp=HyperParams(**sections["hp"]),
                flags=AblationFlags(**sections["flags"]),
                optimizer=OptimizerConfig(**sections["optimizer"]),
                dataset=DatasetConfig(**sections["dataset"]),
                **sections[None],
            )
        except ValidationError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def to_flat(self) -> dict[str, Any]:
        flat = {}
        for key, (section, name) in FLAT_FIELDS.items():
            owner = self if section is None else getattr(self, section)
            flat[key] = _jsonable(getattr(owner, name))
        return flat

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        try:
            flat = json5.loads(text)
        except ValueError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(flat, dict):
            raise ConfigError("config must be a JSON object of UPPER_CASE keys")
        return cls.from_flat(flat)

    def dumps(self) -> str:
        return json.dumps(self.to_flat(), indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    def config_hash(self) -> str:
        """12 hex chars identifying what this config computes."""
        hashed = {k: v for k, v in self.to_flat().items() if k not in UNHASHED_KEYS}
        canonical = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def with_overrides(self, **flat: Any) -> "RunConfig":
        check_keys(flat)
        return RunConfig.from_flat({**self.to_flat(), **flat})
