"""Ring benchmark: K Gaussian classes on a circle, one rotation/translation per domain."""
import math
from typing import Optional, Sequence

import numpy as np

from ..utils.enum import Benchmark
from ..utils.validators import DatasetConfig, DomainSpec
from .dataset import Domain, DomainSplit, MultiDomainDataset


def layout_phase(layout_seed: Optional[int], num_classes: int) -> float:
    """Angular offset of class 0; zero when no layout seed is given."""
    if layout_seed is None:
        return 0.0
    return float(np.random.default_rng(layout_seed).uniform(0.0, 2.0 * math.pi / num_classes))


def class_means(spec: DomainSpec, phase: float = 0.0) -> np.ndarray:
    """(K, 2) array: R(rotation) [cos(2 pi k / K + phase), sin(...)] + translation."""
    angles = 2.0 * math.pi * np.arange(spec.num_classes) / spec.num_classes + phase
    ring = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    theta = math.radians(spec.rotation_deg)
    rotation = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return ring @ rotation.T + np.asarray(spec.translation)


def _sample_split(
    means: np.ndarray, size: int, sigma: float, rng: np.random.Generator
) -> DomainSplit:
    labels = np.arange(size) % means.shape[0]
    features = means[labels] + sigma * rng.standard_normal((size, 2))
    return DomainSplit(x=features, y=labels)


def generate_domain(spec: DomainSpec, name: str, phase: float = 0.0) -> Domain:
    rng = np.random.default_rng(spec.seed)
    means = class_means(spec, phase)
    train = _sample_split(means, spec.train_size, spec.noise_sigma, rng)
    test = _sample_split(means, spec.test_size, spec.noise_sigma, rng)
    return Domain(name=name, train=train, test=test)


def generate_ring_domains(
    specs: Sequence[DomainSpec],
    layout_seed: Optional[int] = None,
    tag: str = "",
) -> MultiDomainDataset:
    """Every spec but the last becomes a source domain; the last is the target.

    Sample i of a split belongs to class ``i mod K``, so splits are class balanced up to one
    sample per class.
    """
    if len(specs) < 2:
        raise ValueError("need at least one source spec and one target spec")
    classes = {spec.num_classes for spec in specs}
    if len(classes) != 1:
        raise ValueError(f"all domains must share the class count, got {sorted(classes)}")
    num_classes = classes.pop()
    phase = layout_phase(layout_seed, num_classes)

    sources = tuple(
        generate_domain(spec, f"source{index}", phase)
        for index, spec in enumerate(specs[:-1], start=1)
    )
    target = generate_domain(specs[-1], "target", phase)
    return MultiDomainDataset(
        num_classes=num_classes,
        input_dim=2,
        sources=sources,
        target=target,
        tag=tag,
    )


def dataset_from_config(cfg: DatasetConfig, tag: str = "") -> MultiDomainDataset:
    """Load ``cfg.path`` when set, otherwise generate the configured ring benchmark."""
    if cfg.path:
        from .storage import load_dataset
        return load_dataset(cfg.path)
    if cfg.benchmark is Benchmark.Ring5:
        return generate_ring_domains(cfg.domain_specs(), tag=tag)
    raise ValueError(f"no generator for benchmark {cfg.benchmark.value!r}")
