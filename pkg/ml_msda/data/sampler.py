import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .dataset import TrainingView

BRANCH_STREAM, TARGET_STREAM, POOL_STREAM = 0, 1, 2


def _keyed_rng(base: int, stream: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([base, stream, *key]))


@dataclass(frozen=True)
class StepBatch:
    """Inputs of one training step.

    Branch j sees ``branch_x[j-1]``; the guidance network sees ``combined_x``; every subnetwork
    sees the same ``target_x``.
    """

    branch_x: tuple[np.ndarray, ...]
    branch_y: tuple[np.ndarray, ...]
    combined_x: np.ndarray
    combined_y: np.ndarray
    target_x: np.ndarray
    combined_indices: np.ndarray
    epoch_end: bool

    def source_inputs(self) -> list[np.ndarray]:
        return [*self.branch_x, self.combined_x]

    def source_labels(self) -> list[np.ndarray]:
        return [*self.branch_y, self.combined_y]


class CyclicStream:
    """Indices 0..n-1 without replacement, reshuffled each time the remainder cannot fill a batch."""

    def __init__(self, size: int, rng: np.random.Generator):
        self.size = size
        self.rng = rng
        self.order = rng.permutation(size)
        self.position = 0

    def take(self, count: int) -> np.ndarray:
        if self.position + count > self.size:
            self.order = self.rng.permutation(self.size)
            self.position = 0
        chunk = self.order[self.position:self.position + count]
        self.position += count
        return chunk


class DomainSampler:
    """Draws step batches; one epoch is one pass over the combined source pool.

    The combined-source batch comes from the concatenation of all source train splits without
    replacement, so the last batch of an epoch may be short. Branch and target streams cycle
    independently with full-size batches. With ``equal_domain_sampling`` the combined batch
    takes an equal share from every source domain instead.
    """

    def __init__(
        self,
        view: TrainingView,
        batch_size: int,
        rng: np.random.Generator,
        equal_domain_sampling: bool = False,
    ):
        sizes = [x.shape[0] for x in view.source_x] + [view.target_x.shape[0]]
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if min(sizes) == 0:
            raise ValueError("every domain needs at least one training sample")
        if batch_size > min(sizes):
            raise ValueError(
                f"batch_size {batch_size} exceeds the smallest domain train size {min(sizes)}"
            )
        self.view = view
        self.batch_size = batch_size
        self.rng = rng
        self.equal_domain_sampling = equal_domain_sampling

        self.offsets = np.cumsum([0] + sizes[:-1])
        self.pool_x = np.concatenate(view.source_x, axis=0)
        self.pool_y = np.concatenate(view.source_y, axis=0)
        self.pool_size = self.pool_x.shape[0]
        self.steps_per_epoch = math.ceil(self.pool_size / batch_size)

        # Branch and target streams are keyed by source domain, never by list position
        base = int(rng.integers(2**63))
        keys = view.stream_keys()
        self.branch_streams = [
            CyclicStream(n, _keyed_rng(base, BRANCH_STREAM, key)) for n, key in zip(sizes[:-1], keys)
        ]
        self.target_stream = CyclicStream(sizes[-1], _keyed_rng(base, TARGET_STREAM))
        self.pool_streams = (
            [CyclicStream(n, _keyed_rng(base, POOL_STREAM, key)) for n, key in zip(sizes[:-1], keys)]
            if equal_domain_sampling
            else []
        )

        self.epoch = 0
        self.step_in_epoch = 0
        self._pool_order = rng.permutation(self.pool_size)
        self._pool_position = 0

    def _combined_indices(self) -> np.ndarray:
        if self.equal_domain_sampling:
            shares = np.full(len(self.pool_streams), self.batch_size // len(self.pool_streams))
            shares[: self.batch_size % len(self.pool_streams)] += 1
            return np.concatenate([
                self.offsets[j] + stream.take(int(share))
                for j, (stream, share) in enumerate(zip(self.pool_streams, shares))
                if share
            ])
        start = self._pool_position
        self._pool_position = min(start + self.batch_size, self.pool_size)
        return self._pool_order[start:self._pool_position]

    def next(self) -> StepBatch:
        combined = self._combined_indices()
        branch = [stream.take(self.batch_size) for stream in self.branch_streams]
        target = self.target_stream.take(self.batch_size)

        self.step_in_epoch += 1
        epoch_end = self.step_in_epoch == self.steps_per_epoch
        if epoch_end:
            self.epoch += 1
            self.step_in_epoch = 0
            self._pool_order = self.rng.permutation(self.pool_size)
            self._pool_position = 0

        return StepBatch(
            branch_x=tuple(x[idx] for x, idx in zip(self.view.source_x, branch)),
            branch_y=tuple(y[idx] for y, idx in zip(self.view.source_y, branch)),
            combined_x=self.pool_x[combined],
            combined_y=self.pool_y[combined],
            target_x=self.view.target_x[target],
            combined_indices=combined,
            epoch_end=epoch_end,
        )

    def epoch_batches(self) -> Iterator[StepBatch]:
        """The remaining batches of the current epoch."""
        while True:
            batch = self.next()
            yield batch
            if batch.epoch_end:
                return


def sampler_next(sampler: DomainSampler) -> StepBatch:
    return sampler.next()
