"""Dense float64 tensors and the tape that records operations on them.

A tensor's ``data`` is never written in place: arrays are frozen on creation and optimisers
rebind ``data`` to a fresh array. Only ``grad`` accumulates, and only inside :func:`backward`.
"""
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import DimensionError, NumericError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def _freeze(array: np.ndarray, context: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{context} produced non-finite values")
    array.setflags(write=False)
    return array


class Tensor:
    """A value node: float64 data, an optional gradient and a ``requires_grad`` switch."""

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self._data = _freeze(np.array(data, dtype=np.float64), name or "tensor")
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @classmethod
    def _wrap(cls, array: np.ndarray, requires_grad: bool, context: str) -> "Tensor":
        tensor = cls.__new__(cls)
        tensor._data = _freeze(np.ascontiguousarray(array, dtype=np.float64), context)
        tensor.requires_grad = requires_grad
        tensor.grad = None
        tensor.name = None
        return tensor

    @property
    def data(self) -> np.ndarray:
        return self._data

    @data.setter
    def data(self, value) -> None:
        array = np.array(value, dtype=np.float64)
        if array.shape != self._data.shape:
            raise DimensionError(f"cannot rebind data of shape {self._data.shape} to {array.shape}")
        self._data = _freeze(array, self.name or "tensor")

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def ndim(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    def item(self) -> float:
        if self._data.size != 1:
            raise DimensionError(f"item() needs a single value, tensor has shape {self.shape}")
        return float(self._data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self._data

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    def __add__(self, other):
        from .functions import add
        return add(self, other)

    def __radd__(self, other):
        from .functions import add
        return add(other, self)

    def __sub__(self, other):
        from .functions import sub
        return sub(self, other)

    def __rsub__(self, other):
        from .functions import sub
        return sub(other, self)

    def __mul__(self, other):
        from .functions import mul
        return mul(self, other)

    def __rmul__(self, other):
        from .functions import mul
        return mul(other, self)

    def __neg__(self):
        from .functions import neg
        return neg(self)

    def __matmul__(self, other):
        from .functions import matmul
        return matmul(self, other)


@dataclass(frozen=True)
class TapeEntry:
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """Records operations in execution order while active.

    Tapes are per thread: entering a tape in one thread never records work done in another.
    """

    def __init__(self):
        self.entries: list[TapeEntry] = []

    def __enter__(self) -> "Tape":
        _stack().append(self)
        return self

    def __exit__(self, *exc_info) -> None:
        stack = _stack()
        if not stack or stack[-1] is not self:
            raise RuntimeError("tapes must be exited in reverse order of entry")
        stack.pop()

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, entry: TapeEntry) -> None:
        self.entries.append(entry)


def _stack() -> list[Tape]:
    if not hasattr(_state, "tapes"):
        _state.tapes = []
    return _state.tapes


def active_tape() -> Optional[Tape]:
    stack = _stack()
    return stack[-1] if stack else None


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(node) into ``grad`` of every requires_grad node reachable from loss."""
    if loss.size != 1:
        raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    nodes: dict[int, Tensor] = {id(loss): loss}

    for entry in reversed(tape.entries):
        upstream = grads.get(id(entry.output))
        if upstream is None:
            continue
        for node, grad in zip(entry.inputs, entry.backward(upstream)):
            if grad is None or not node.requires_grad:
                continue
            if grad.shape != node.shape:
                raise DimensionError(
                    f"{entry.op} backward produced shape {grad.shape} for input {node.shape}"
                )
            key = id(node)
            grads[key] = grads[key] + grad if key in grads else grad
            nodes[key] = node

    for key, grad in grads.items():
        node = nodes[key]
        if not node.requires_grad:
            continue
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient for {node!r}")
        node.grad = grad.copy() if node.grad is None else node.grad + grad
