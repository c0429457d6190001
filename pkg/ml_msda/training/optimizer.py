from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..autodiff import Tensor

DEFAULT_SCHEDULE: tuple[tuple[int, float], ...] = ((0, 0.01), (10, 0.001), (20, 0.0001))


def lr_at(epoch: int, schedule: Sequence[Sequence[float]] = DEFAULT_SCHEDULE) -> float:
    """Learning rate of the last schedule entry whose start epoch is <= ``epoch``."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    rate = float(schedule[0][1])
    for start, value in schedule:
        if epoch >= start:
            rate = float(value)
    return rate


@dataclass
class OptimState:
    learning_rate: float
    momentum: float
    velocity: dict[str, np.ndarray] = field(default_factory=dict)
    epoch: int = 0
    step: int = 0


class MomentumSGD:
    """v <- m v + g; theta <- theta - lr v, over every named parameter."""

    def __init__(
        self,
        params: Sequence[tuple[str, Tensor]],
        momentum: float = 0.9,
        schedule: Sequence[Sequence[float]] = DEFAULT_SCHEDULE,
    ):
        self.params = list(params)
        self.schedule = schedule
        self.state = OptimState(
            learning_rate=lr_at(0, schedule),
            momentum=momentum,
            velocity={name: np.zeros(p.shape) for name, p in self.params},
        )

    def set_epoch(self, epoch: int) -> float:
        self.state.epoch = epoch
        self.state.learning_rate = lr_at(epoch, self.schedule)
        return self.state.learning_rate

    def step(self) -> None:
        lr, momentum = self.state.learning_rate, self.state.momentum
        for name, param in self.params:
            grad = param.grad if param.grad is not None else np.zeros(param.shape)
            velocity = momentum * self.state.velocity[name] + grad
            self.state.velocity[name] = velocity
            param.data = param.data - lr * velocity
        self.state.step += 1

    def zero_grad(self) -> None:
        for _, param in self.params:
            param.zero_grad()

    def state_dict(self) -> dict[str, Any]:
        return {
            "epoch": self.state.epoch,
            "step": self.state.step,
            "velocity": {name: v.copy() for name, v in self.state.velocity.items()},
        }

    def load_state_dict(self, state: dict[str, Any]) -> None:
        velocity = state["velocity"]
        missing = [name for name, _ in self.params if name not in velocity]
        if missing:
            raise ValueError(f"optimizer state lacks velocity for {', '.join(missing)}")
        self.state.velocity = {name: np.array(velocity[name], dtype=np.float64) for name, _ in self.params}
        self.state.step = int(state["step"])
        self.set_epoch(int(state["epoch"]))
