"""Central finite-difference checks for analytic gradients."""
from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor, backward


def numerical_gradient(fn: Callable[[], Tensor], param: Tensor, eps: float = 1e-3) -> np.ndarray:
    """(f(x + eps) - f(x - eps)) / (2 eps) for every entry of ``param``."""
    original = param.data
    grad = np.zeros(original.shape, dtype=np.float64)
    try:
        for index in np.ndindex(original.shape):
            shifted = original.copy()
            shifted[index] += eps
            param.data = shifted
            upper = fn().item()
            shifted[index] -= 2 * eps
            param.data = shifted
            lower = fn().item()
            grad[index] = (upper - lower) / (2 * eps)
    finally:
        param.data = original
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-12) -> float:
    """max|a - n| / max(max|a|, max|n|, floor)."""
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def gradcheck(
    fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-3,
) -> list[float]:
    """Relative error of the taped gradient of ``fn()`` against finite differences, per param.

    ``fn`` must rebuild its graph from the current parameter values on every call.
    """
    for param in params:
        param.zero_grad()
    with Tape() as tape:
        loss = fn()
    backward(loss, tape)

    errors = []
    for param in params:
        analytic = param.grad if param.grad is not None else np.zeros(param.shape)
        errors.append(relative_error(analytic, numerical_gradient(fn, param, eps)))
    return errors
