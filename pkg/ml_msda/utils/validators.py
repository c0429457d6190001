import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enum import Benchmark, ConditioningMode, InferenceMode, MutualDivergence


def _positive_widths(widths: tuple[int, ...]) -> tuple[int, ...]:
    if any(width < 1 for width in widths):
        raise ValueError(f"layer widths must be >= 1, got {list(widths)}")
    return widths


class ArchConfig(BaseModel):
    """Layer sizes of the N branch subnetworks and the guidance subnetwork."""

    model_config = ConfigDict(frozen=True)

    input_dim: int = Field(ge=1)
    trunk_layers: tuple[int, ...] = ()
    private_layers: tuple[int, ...] = ()
    feature_dim: int = Field(ge=1)
    num_classes: int = Field(ge=2)
    num_sources: int = Field(ge=1)
    share_trunk: bool = True
    discriminator_layers: tuple[int, ...] = (32,)
    conditioning: ConditioningMode = ConditioningMode.Multilinear
    detach_preds: bool = True

    @field_validator("trunk_layers", "private_layers", "discriminator_layers")
    @classmethod
    def check_widths(cls, widths: tuple[int, ...]) -> tuple[int, ...]:
        return _positive_widths(widths)

    @property
    def num_subnetworks(self) -> int:
        return self.num_sources + 1

    @property
    def guidance_index(self) -> int:
        return self.num_sources + 1

    @property
    def discriminator_input_dim(self) -> int:
        if self.conditioning is ConditioningMode.Multilinear:
            return self.feature_dim * self.num_classes
        if self.conditioning is ConditioningMode.Concat:
            return self.feature_dim + self.num_classes
        return self.feature_dim


class HyperParams(BaseModel):
    """Trade-off weights of the overall objective."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    alpha: float = Field(5.0, ge=0, allow_inf_nan=False)
    beta: float = Field(0.5, ge=0, allow_inf_nan=False)
    lambda_: float = Field(5.0, ge=0, allow_inf_nan=False, alias="lambda")
    mutual_divergence: MutualDivergence = MutualDivergence.JensenShannon
    freeze_guidance: bool = False

    def effective(self, flags: "AblationFlags") -> "HyperParams":
        """Weights with ablated terms forced to zero."""
        return self.model_copy(update={
            "alpha": 0.0 if flags.no_mutual else self.alpha,
            "beta": 0.0 if flags.no_entropy else self.beta,
        })


class AblationFlags(BaseModel):
    """All switches off is the full method."""

    model_config = ConfigDict(frozen=True)

    no_condition_adv: bool = False
    no_entropy: bool = False
    no_mutual: bool = False
    inference_mode: InferenceMode = InferenceMode.Ensemble


class DomainSpec(BaseModel):
    """Generator settings for one ring domain."""

    model_config = ConfigDict(frozen=True)

    rotation_deg: float = Field(allow_inf_nan=False)
    translation: tuple[float, float] = (0.0, 0.0)
    noise_sigma: float = Field(gt=0, allow_inf_nan=False)
    num_classes: int = Field(ge=2)
    train_size: int = Field(ge=1)
    test_size: int = Field(ge=1)
    seed: int = 0

    @field_validator("translation")
    @classmethod
    def check_translation(cls, value: tuple[float, float]) -> tuple[float, float]:
        if not all(math.isfinite(v) for v in value):
            raise ValueError("translation must be finite")
        return value


class DatasetConfig(BaseModel):
    """Where the multi-domain dataset comes from: a file, or the ring generator."""

    model_config = ConfigDict(frozen=True)

    benchmark: Benchmark = Benchmark.Ring5
    path: Optional[str] = None
    num_classes: int = Field(3, ge=2)
    source_rotations: tuple[float, ...] = (0.0, 20.0, 40.0, 60.0)
    target_rotation: float = 80.0
    translations: tuple[tuple[float, float], ...] = ()
    noise_sigma: float = Field(0.25, gt=0)
    train_size: int = Field(500, ge=1)
    test_size: int = Field(200, ge=1)
    seed: int = 0
    equal_domain_sampling: bool = False

    @model_validator(mode="after")
    def check_domains(self) -> "DatasetConfig":
        if not self.source_rotations:
            raise ValueError("at least one source domain is required")
        if self.translations and len(self.translations) != len(self.source_rotations) + 1:
            raise ValueError(
                "translations must list one [x, y] pair per domain (sources, then target)"
            )
        return self

    @property
    def num_sources(self) -> int:
        return len(self.source_rotations)

    def domain_specs(self) -> list[DomainSpec]:
        """Sources in order, then the target."""
        rotations = [*self.source_rotations, self.target_rotation]
        translations = self.translations or tuple((0.0, 0.0) for _ in rotations)
        return [
            DomainSpec(
                rotation_deg=rotation,
                translation=translation,
                noise_sigma=self.noise_sigma,
                num_classes=self.num_classes,
                train_size=self.train_size,
                test_size=self.test_size,
                seed=self.seed * 1009 + index,
            )
            for index, (rotation, translation) in enumerate(zip(rotations, translations))
        ]


class OptimizerConfig(BaseModel):
    """SGD with momentum and a piecewise-constant learning rate."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(30, ge=0)
    batch_size: int = Field(64, ge=1)
    momentum: float = Field(0.9, ge=0, lt=1)
    lr_schedule: tuple[tuple[int, float], ...] = ((0, 0.01), (10, 0.001), (20, 0.0001))
    adv_warmup: bool = False

    @field_validator("lr_schedule")
    @classmethod
    def check_schedule(cls, schedule: tuple[tuple[int, float], ...]):
        if not schedule or schedule[0][0] != 0:
            raise ValueError("lr_schedule must start at epoch 0")
        starts = [start for start, _ in schedule]
        if starts != sorted(set(starts)):
            raise ValueError("lr_schedule start epochs must be strictly increasing")
        if any(not (lr > 0 and math.isfinite(lr)) for _, lr in schedule):
            raise ValueError("learning rates must be positive and finite")
        return schedule
