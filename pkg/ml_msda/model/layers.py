from typing import Iterator

import numpy as np

from ..autodiff import Tensor, matmul, relu


class Linear:
    """Affine map ``x @ weight + bias`` with weight stored as (in, out)."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, name: str):
        bound = np.sqrt(6.0 / (in_features + out_features))
        self.in_features = in_features
        self.out_features = out_features
        self.name = name
        self.weight = Tensor(
            rng.uniform(-bound, bound, size=(in_features, out_features)),
            requires_grad=True,
            name=f"{name}.weight",
        )
        self.bias = Tensor(np.zeros(out_features), requires_grad=True, name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        return matmul(x, self.weight) + self.bias

    def parameters(self) -> Iterator[Tensor]:
        yield self.weight
        yield self.bias


def build_stack(
    in_features: int, widths: list[int], rng: np.random.Generator, prefix: str
) -> list[Linear]:
    layers = []
    for index, width in enumerate(widths):
        layers.append(Linear(in_features, width, rng, f"{prefix}.{index}"))
        in_features = width
    return layers


def relu_stack(layers: list[Linear], x: Tensor) -> Tensor:
    for layer in layers:
        x = relu(layer(x))
    return x
