"""Differentiable operations.

Each operation is a :class:`Function` with a ``forward`` over arrays and a ``backward`` that maps
the upstream gradient to one gradient per input. Broadcasting is limited to scalar operands and
row-vector biases against a matrix.
"""
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import DimensionError, NumericError
from .tensor import Tensor, TapeEntry, active_tape

Operand = Union[Tensor, float, int]

LOG_EPS = 1e-7


class Context:
    """Scratch space a forward pass leaves for its backward pass."""

    def save(self, **values) -> None:
        self.__dict__.update(values)


class Function:
    name = "function"

    @staticmethod
    def forward(ctx: Context, *arrays: np.ndarray, **kwargs) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs) -> Tensor:
        ctx = Context()
        out_data = cls.forward(ctx, *(t.data for t in inputs), **kwargs)
        tape = active_tape()
        record = tape is not None and any(t.requires_grad for t in inputs)
        output = Tensor._wrap(out_data, requires_grad=record, context=cls.name)
        if record:
            tape.record(TapeEntry(
                op=cls.name,
                inputs=tuple(inputs),
                output=output,
                backward=lambda grad: cls.backward(ctx, grad),
            ))
        return output


def _as_tensor(value: Operand) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _check_broadcast(op: str, a: tuple[int, ...], b: tuple[int, ...]) -> None:
    if a == b:
        return
    for big, small in ((a, b), (b, a)):
        if small in ((), (1,)):
            return
        if len(big) == 2 and small in ((big[1],), (1, big[1])):
            return
    raise DimensionError(f"{op}: incompatible shapes {a} and {b}")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_axis(axis: Optional[int], ndim: int) -> Optional[int]:
    if axis is None:
        return None
    if not -ndim <= axis < ndim:
        raise DimensionError(f"axis {axis} out of range for a {ndim}-d tensor")
    return axis % ndim


# ---------------------------------------------------------------------------
# Arithmetic


class MatMul(Function):
    name = "matmul"

    @staticmethod
    def forward(ctx, a, b):
        if a.ndim != 2 or b.ndim != 2:
            raise DimensionError(f"matmul needs 2-d operands, got {a.shape} and {b.shape}")
        if a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul inner dimensions differ: {a.shape} x {b.shape}")
        ctx.save(a=a, b=b)
        return a @ b

    @staticmethod
    def backward(ctx, grad):
        return grad @ ctx.b.T, ctx.a.T @ grad


class Add(Function):
    name = "add"

    @staticmethod
    def forward(ctx, a, b):
        _check_broadcast("add", a.shape, b.shape)
        ctx.save(a_shape=a.shape, b_shape=b.shape)
        return a + b

    @staticmethod
    def backward(ctx, grad):
        return _unbroadcast(grad, ctx.a_shape), _unbroadcast(grad, ctx.b_shape)


class Sub(Function):
    name = "sub"

    @staticmethod
    def forward(ctx, a, b):
        _check_broadcast("sub", a.shape, b.shape)
        ctx.save(a_shape=a.shape, b_shape=b.shape)
        return a - b

    @staticmethod
    def backward(ctx, grad):
        return _unbroadcast(grad, ctx.a_shape), _unbroadcast(-grad, ctx.b_shape)


class Mul(Function):
    name = "mul"

    @staticmethod
    def forward(ctx, a, b):
        _check_broadcast("mul", a.shape, b.shape)
        ctx.save(a=a, b=b)
        return a * b

    @staticmethod
    def backward(ctx, grad):
        return _unbroadcast(grad * ctx.b, ctx.a.shape), _unbroadcast(grad * ctx.a, ctx.b.shape)


class Neg(Function):
    name = "neg"

    @staticmethod
    def forward(ctx, a):
        return -a

    @staticmethod
    def backward(ctx, grad):
        return (-grad,)


# ---------------------------------------------------------------------------
# Elementwise nonlinearities


class ReLU(Function):
    name = "relu"

    @staticmethod
    def forward(ctx, a):
        ctx.save(mask=a > 0)
        return np.where(ctx.mask, a, 0.0)

    @staticmethod
    def backward(ctx, grad):
        return (np.where(ctx.mask, grad, 0.0),)


class Log(Function):
    name = "log"

    @staticmethod
    def forward(ctx, a):
        if np.any(a <= 0):
            raise NumericError("log of a non-positive value")
        ctx.save(a=a)
        return np.log(a)

    @staticmethod
    def backward(ctx, grad):
        return (grad / ctx.a,)


class Exp(Function):
    name = "exp"

    @staticmethod
    def forward(ctx, a):
        with np.errstate(over="ignore"):
            out = np.exp(a)
        if not np.all(np.isfinite(out)):
            raise NumericError("exp overflowed")
        ctx.save(out=out)
        return out

    @staticmethod
    def backward(ctx, grad):
        return (grad * ctx.out,)


class Sigmoid(Function):
    name = "sigmoid"

    @staticmethod
    def forward(ctx, a):
        z = np.exp(-np.abs(a))
        out = np.where(a >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
        ctx.save(out=out)
        return out

    @staticmethod
    def backward(ctx, grad):
        return (grad * ctx.out * (1.0 - ctx.out),)


class Clamp(Function):
    name = "clamp"

    @staticmethod
    def forward(ctx, a, low: float, high: float):
        if low > high:
            raise ValueError(f"clamp bounds out of order: [{low}, {high}]")
        ctx.save(mask=(a >= low) & (a <= high))
        return np.clip(a, low, high)

    @staticmethod
    def backward(ctx, grad):
        return (np.where(ctx.mask, grad, 0.0),)


class SoftmaxRows(Function):
    name = "softmax_rows"

    @staticmethod
    def forward(ctx, z):
        if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 1:
            raise DimensionError(f"softmax_rows needs a non-empty b x K matrix, got {z.shape}")
        shifted = np.exp(z - z.max(axis=1, keepdims=True))
        out = shifted / shifted.sum(axis=1, keepdims=True)
        ctx.save(out=out)
        return out

    @staticmethod
    def backward(ctx, grad):
        s = ctx.out
        return (s * (grad - (grad * s).sum(axis=1, keepdims=True)),)


# ---------------------------------------------------------------------------
# Reductions


class Sum(Function):
    name = "sum"

    @staticmethod
    def forward(ctx, a, axis: Optional[int] = None):
        axis = _check_axis(axis, a.ndim)
        ctx.save(shape=a.shape, axis=axis)
        return np.asarray(a.sum(axis=axis))

    @staticmethod
    def backward(ctx, grad):
        if ctx.axis is not None:
            grad = np.expand_dims(grad, ctx.axis)
        return (np.broadcast_to(grad, ctx.shape).copy(),)


class Mean(Function):
    name = "mean"

    @staticmethod
    def forward(ctx, a, axis: Optional[int] = None):
        axis = _check_axis(axis, a.ndim)
        if a.size == 0:
            raise DimensionError("mean of an empty tensor")
        count = a.size if axis is None else a.shape[axis]
        ctx.save(shape=a.shape, axis=axis, count=count)
        return np.asarray(a.mean(axis=axis))

    @staticmethod
    def backward(ctx, grad):
        if ctx.axis is not None:
            grad = np.expand_dims(grad, ctx.axis)
        return (np.broadcast_to(grad / ctx.count, ctx.shape).copy(),)


# ---------------------------------------------------------------------------
# Structural


class OuterFlatten(Function):
    """Row i is vec(f_i outer p_i), feature index slowest."""

    name = "outer_flatten"

    @staticmethod
    def forward(ctx, f, p):
        if f.ndim != 2 or p.ndim != 2 or f.shape[0] != p.shape[0]:
            raise DimensionError(f"outer_flatten batch mismatch: {f.shape} and {p.shape}")
        ctx.save(f=f, p=p)
        batch, d = f.shape
        return np.einsum("bd,bk->bdk", f, p).reshape(batch, d * p.shape[1])

    @staticmethod
    def backward(ctx, grad):
        blocks = grad.reshape(ctx.f.shape[0], ctx.f.shape[1], ctx.p.shape[1])
        return (
            np.einsum("bdk,bk->bd", blocks, ctx.p),
            np.einsum("bdk,bd->bk", blocks, ctx.f),
        )


class ConcatCols(Function):
    name = "concat_cols"

    @staticmethod
    def forward(ctx, a, b):
        if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
            raise DimensionError(f"concat_cols batch mismatch: {a.shape} and {b.shape}")
        ctx.save(split=a.shape[1])
        return np.concatenate([a, b], axis=1)

    @staticmethod
    def backward(ctx, grad):
        return grad[:, :ctx.split], grad[:, ctx.split:]


class StopGradient(Function):
    name = "stop_gradient"

    @staticmethod
    def forward(ctx, a):
        return a.copy()

    @staticmethod
    def backward(ctx, grad):
        return (np.zeros_like(grad),)


class GradientReversal(Function):
    name = "gradient_reversal"

    @staticmethod
    def forward(ctx, a, scale: float):
        if not scale >= 0:
            raise ValueError(f"gradient_reversal scale must be >= 0, got {scale}")
        ctx.save(scale=float(scale))
        return a.copy()

    @staticmethod
    def backward(ctx, grad):
        return (-ctx.scale * grad,)


# ---------------------------------------------------------------------------
# Functional API


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(a, b)


def add(a: Operand, b: Operand) -> Tensor:
    return Add.apply(_as_tensor(a), _as_tensor(b))


def sub(a: Operand, b: Operand) -> Tensor:
    return Sub.apply(_as_tensor(a), _as_tensor(b))


def mul(a: Operand, b: Operand) -> Tensor:
    return Mul.apply(_as_tensor(a), _as_tensor(b))


def neg(a: Tensor) -> Tensor:
    return Neg.apply(a)


def relu(a: Tensor) -> Tensor:
    return ReLU.apply(a)


def log(a: Tensor) -> Tensor:
    return Log.apply(a)


def exp(a: Tensor) -> Tensor:
    return Exp.apply(a)


def sigmoid(a: Tensor) -> Tensor:
    return Sigmoid.apply(a)


def clamp(a: Tensor, low: float, high: float) -> Tensor:
    return Clamp.apply(a, low=low, high=high)


def clamped_log(p: Tensor, eps: float = LOG_EPS, high: float = 1.0) -> Tensor:
    """log(p) with p clamped into [eps, high] first."""
    return log(clamp(p, eps, high))


def softmax_rows(z: Tensor) -> Tensor:
    return SoftmaxRows.apply(z)


def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    return Sum.apply(a, axis=axis)


def mean(a: Tensor, axis: Optional[int] = None) -> Tensor:
    return Mean.apply(a, axis=axis)


def outer_flatten(f: Tensor, p: Tensor) -> Tensor:
    return OuterFlatten.apply(f, p)


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    return ConcatCols.apply(a, b)


def stop_gradient(a: Tensor) -> Tensor:
    return StopGradient.apply(a)


def gradient_reversal(a: Tensor, scale: float) -> Tensor:
    return GradientReversal.apply(a, scale=scale)


ELEMENTWISE = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "relu": relu,
    "log": log,
    "exp": exp,
    "neg": neg,
}


def elementwise(op: str, *operands: Operand) -> Tensor:
    """Dispatch one of add, sub, mul, relu, log, exp, neg by name."""
    try:
        fn = ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}; expected one of {sorted(ELEMENTWISE)}")
    return fn(*operands)


def reduce(op: str, a: Tensor, axis: Optional[int] = None) -> Tensor:
    if op == "sum":
        return sum(a, axis)
    if op == "mean":
        return mean(a, axis)
    raise ValueError(f"unknown reduction {op!r}; expected 'sum' or 'mean'")
