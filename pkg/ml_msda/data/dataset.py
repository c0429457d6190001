import hashlib
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class LabeledSample:
    x: np.ndarray
    y: int


@dataclass(frozen=True)
class DomainSplit:
    """Features ``x`` (n, input_dim) and class indices ``y`` (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, np.float64))
        object.__setattr__(self, "y", _frozen(self.y, np.int64))
        if self.x.ndim != 2 or self.y.shape != (self.x.shape[0],):
            raise ValueError(f"split shapes disagree: x {self.x.shape}, y {self.y.shape}")

    def __len__(self) -> int:
        return self.x.shape[0]

    def __iter__(self) -> Iterator[LabeledSample]:
        for x, y in zip(self.x, self.y):
            yield LabeledSample(x=x, y=int(y))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DomainSplit):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)


@dataclass(frozen=True)
class Domain:
    name: str
    train: DomainSplit
    test: DomainSplit

    def content_key(self) -> int:
        """64-bit digest of the training split; follows the domain wherever it is listed."""
        digest = hashlib.blake2b(digest_size=8)
        digest.update(self.train.x.tobytes())
        digest.update(self.train.y.tobytes())
        return int.from_bytes(digest.digest(), "little")


@dataclass(frozen=True)
class TrainingView:
    """What the trainer may read: labelled sources and target features, never target labels."""

    num_classes: int
    input_dim: int
    source_x: tuple[np.ndarray, ...]
    source_y: tuple[np.ndarray, ...]
    target_x: np.ndarray
    source_keys: tuple[int, ...] = ()

    @property
    def num_sources(self) -> int:
        return len(self.source_x)

    def stream_keys(self) -> tuple[int, ...]:
        """Per-source seeding keys; positional when the view carries no content keys."""
        return self.source_keys or tuple(range(1, self.num_sources + 1))


@dataclass(frozen=True, eq=False)
class MultiDomainDataset:
    """N labelled source domains and one target domain sharing K classes and input width."""

    num_classes: int
    input_dim: int
    sources: tuple[Domain, ...]
    target: Domain
    tag: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sources:
            raise ValueError("a dataset needs at least one source domain")
        for domain in self.domains:
            for split in (domain.train, domain.test):
                if split.x.shape[1] != self.input_dim:
                    raise ValueError(
                        f"domain {domain.name!r} has input width {split.x.shape[1]}, "
                        f"expected {self.input_dim}"
                    )
                if len(split) and (split.y.min() < 0 or split.y.max() >= self.num_classes):
                    raise ValueError(f"domain {domain.name!r} has labels outside [0, {self.num_classes})")

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    @property
    def domains(self) -> tuple[Domain, ...]:
        return (*self.sources, self.target)

    def source_keys(self) -> tuple[int, ...]:
        return tuple(d.content_key() for d in self.sources)

    def training_view(self) -> TrainingView:
        return TrainingView(
            num_classes=self.num_classes,
            input_dim=self.input_dim,
            source_x=tuple(d.train.x for d in self.sources),
            source_y=tuple(d.train.y for d in self.sources),
            target_x=self.target.train.x,
            source_keys=self.source_keys(),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiDomainDataset):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and self.input_dim == other.input_dim
            and self.tag == other.tag
            and self.domains == other.domains
        )
