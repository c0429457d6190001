"""N branch subnetworks plus one guidance subnetwork.

Subnetwork indices are 1-based: 1..N pair one source domain with the target, N+1 is the
guidance network fed with the combined sources. Every subnetwork has an extractor (trunk then
private stage), a classifier and a domain discriminator.
"""
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from ..autodiff import (
    Tensor,
    concat_cols,
    gradient_reversal,
    outer_flatten,
    relu,
    sigmoid,
    softmax_rows,
    stop_gradient,
)
from ..errors import DimensionError
from ..utils.enum import ConditioningMode
from ..utils.validators import AblationFlags, ArchConfig
from .layers import Linear, build_stack, relu_stack

ArrayLike = Union[Tensor, np.ndarray]


def subnetwork_name(index: int, num_sources: int) -> str:
    return "guidance" if index == num_sources + 1 else f"branch{index}"


@dataclass
class Subnetwork:
    index: int
    name: str
    trunk: list[Linear]
    private: list[Linear]
    classifier: Linear
    discriminator: list[Linear]

    @property
    def extractor(self) -> list[Linear]:
        return [*self.trunk, *self.private]


class MlMsdaModel:
    def __init__(self, arch: ArchConfig, shared_trunk: Optional[list[Linear]], subnetworks: list[Subnetwork]):
        if len(subnetworks) != arch.num_subnetworks:
            raise ValueError(
                f"expected {arch.num_subnetworks} subnetworks, got {len(subnetworks)}"
            )
        self.arch = arch
        self.shared_trunk = shared_trunk
        self.subnetworks = subnetworks

    @property
    def num_sources(self) -> int:
        return self.arch.num_sources

    @property
    def guidance_index(self) -> int:
        return self.arch.guidance_index

    def subnetwork(self, index: int) -> Subnetwork:
        if not 1 <= index <= self.arch.num_subnetworks:
            raise IndexError(
                f"subnetwork index {index} out of range 1..{self.arch.num_subnetworks}"
            )
        return self.subnetworks[index - 1]

    def parameters(self) -> list[tuple[str, Tensor]]:
        """Named parameters in declaration order; a shared trunk is listed once."""
        named: list[tuple[str, Tensor]] = []
        seen: set[int] = set()
        for layer in self._layers():
            for param in layer.parameters():
                if id(param) not in seen:
                    seen.add(id(param))
                    named.append((param.name, param))
        return named

    def zero_grad(self) -> None:
        for _, param in self.parameters():
            param.zero_grad()

    def _layers(self) -> Iterator[Linear]:
        if self.shared_trunk is not None:
            yield from self.shared_trunk
        for sub in self.subnetworks:
            if self.shared_trunk is None:
                yield from sub.trunk
            yield from sub.private
            yield sub.classifier
            yield from sub.discriminator


SHARED_TRUNK_KEY, GUIDANCE_KEY, BRANCH_KEY = 0, 1, 2


def _subnetwork_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def init_model(cfg: ArchConfig, seed: int, branch_keys: Optional[Sequence[int]] = None) -> MlMsdaModel:
    """Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)), zero biases.

    Each subnetwork draws from its own generator seeded by ``(seed, key)``: branch j uses
    ``branch_keys[j-1]`` (a source domain's content key, or j when none are given) and the
    guidance network and shared trunk use fixed keys. A branch's initial weights therefore
    depend on the source it is paired with, not on where that source is listed.
    """
    if branch_keys is None:
        branch_keys = range(1, cfg.num_sources + 1)
    branch_keys = list(branch_keys)
    if len(branch_keys) != cfg.num_sources:
        raise ValueError(f"expected {cfg.num_sources} branch keys, got {len(branch_keys)}")

    trunk_widths = list(cfg.trunk_layers)
    trunk_out = trunk_widths[-1] if trunk_widths else cfg.input_dim

    shared = (
        build_stack(cfg.input_dim, trunk_widths, _subnetwork_rng(seed, SHARED_TRUNK_KEY), "trunk")
        if cfg.share_trunk
        else None
    )

    subnetworks = []
    for index in range(1, cfg.num_subnetworks + 1):
        name = subnetwork_name(index, cfg.num_sources)
        if index == cfg.guidance_index:
            rng = _subnetwork_rng(seed, GUIDANCE_KEY)
        else:
            rng = _subnetwork_rng(seed, BRANCH_KEY, branch_keys[index - 1])
        trunk = shared if shared is not None else build_stack(
            cfg.input_dim, trunk_widths, rng, f"{name}.trunk"
        )
        private = build_stack(
            trunk_out, [*cfg.private_layers, cfg.feature_dim], rng, f"{name}.private"
        )
        classifier = Linear(cfg.feature_dim, cfg.num_classes, rng, f"{name}.classifier")
        discriminator = build_stack(
            cfg.discriminator_input_dim, [*cfg.discriminator_layers, 1], rng, f"{name}.discriminator"
        )
        subnetworks.append(Subnetwork(index, name, trunk, private, classifier, discriminator))

    return MlMsdaModel(cfg, shared, subnetworks)


def _as_input(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def extract(model: MlMsdaModel, j: int, x: ArrayLike) -> Tensor:
    sub = model.subnetwork(j)
    x = _as_input(x)
    if x.ndim != 2 or x.shape[1] != model.arch.input_dim:
        raise DimensionError(f"expected inputs of shape (b, {model.arch.input_dim}), got {x.shape}")
    return relu_stack(sub.extractor, x)


def classify(model: MlMsdaModel, j: int, features: Tensor) -> Tensor:
    sub = model.subnetwork(j)
    if features.ndim != 2 or features.shape[1] != model.arch.feature_dim:
        raise DimensionError(
            f"expected features of shape (b, {model.arch.feature_dim}), got {features.shape}"
        )
    return softmax_rows(sub.classifier(features))


def condition(
    features: Tensor,
    preds: Tensor,
    detach_preds: bool = True,
    mode: ConditioningMode = ConditioningMode.Multilinear,
) -> Tensor:
    """Discriminator input built from features and predictions."""
    if mode is ConditioningMode.Unconditioned:
        return features
    if features.shape[0] != preds.shape[0]:
        raise DimensionError(f"condition batch mismatch: {features.shape} and {preds.shape}")
    if detach_preds:
        preds = stop_gradient(preds)
    if mode is ConditioningMode.Concat:
        return concat_cols(features, preds)
    return outer_flatten(features, preds)


def discriminate(model: MlMsdaModel, j: int, conditioned: Tensor, adv_scale: float) -> Tensor:
    """D_j behind a gradient reversal of ``adv_scale``; outputs lie in (0, 1)."""
    sub = model.subnetwork(j)
    width = model.arch.discriminator_input_dim
    if conditioned.ndim != 2 or conditioned.shape[1] != width:
        raise DimensionError(f"discriminator expects width {width}, got {conditioned.shape}")
    h = gradient_reversal(conditioned, adv_scale)
    *hidden, head = sub.discriminator
    for layer in hidden:
        h = relu(layer(h))
    return sigmoid(head(h))


@dataclass
class SubnetworkOutput:
    index: int
    source_features: Tensor
    target_features: Tensor
    source_probs: Tensor
    target_probs: Tensor
    source_domain: Tensor
    target_domain: Tensor


def forward_all(
    model: MlMsdaModel,
    source_inputs: Sequence[ArrayLike],
    target_input: ArrayLike,
    flags: Optional[AblationFlags] = None,
    adv_scale: float = 1.0,
) -> list[SubnetworkOutput]:
    """Run all N+1 subnetworks for one step.

    ``source_inputs[j-1]`` feeds subnetwork j: source domain j for the branches, the combined
    sources for the guidance network. The same target batch feeds every subnetwork.
    """
    flags = flags or AblationFlags()
    arch = model.arch
    if len(source_inputs) != arch.num_subnetworks:
        raise ValueError(
            f"forward_all needs {arch.num_subnetworks} source batches, got {len(source_inputs)}"
        )
    if target_input is None or any(x is None for x in source_inputs):
        raise ValueError("forward_all is missing a batch")
    if flags.no_condition_adv and arch.conditioning is not ConditioningMode.Unconditioned:
        raise ValueError("no_condition_adv requires a model built with conditioning='none'")

    target = _as_input(target_input)
    outputs = []
    for j, source in enumerate(source_inputs, start=1):
        source_features = extract(model, j, source)
        target_features = extract(model, j, target)
        source_probs = classify(model, j, source_features)
        target_probs = classify(model, j, target_features)
        source_domain = discriminate(
            model, j, condition(source_features, source_probs, arch.detach_preds, arch.conditioning), adv_scale
        )
        target_domain = discriminate(
            model, j, condition(target_features, target_probs, arch.detach_preds, arch.conditioning), adv_scale
        )
        outputs.append(SubnetworkOutput(
            index=j,
            source_features=source_features,
            target_features=target_features,
            source_probs=source_probs,
            target_probs=target_probs,
            source_domain=source_domain,
            target_domain=target_domain,
        ))
    return outputs
