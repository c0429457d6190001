from .functions import (
    LOG_EPS,
    Function,
    add,
    clamp,
    clamped_log,
    concat_cols,
    elementwise,
    exp,
    gradient_reversal,
    log,
    matmul,
    mean,
    mul,
    neg,
    outer_flatten,
    reduce,
    relu,
    sigmoid,
    softmax_rows,
    stop_gradient,
    sub,
)
from .functions import sum as sum_
from .gradcheck import gradcheck, numerical_gradient, relative_error
from .tensor import Tape, TapeEntry, Tensor, active_tape, backward

__all__ = [
    "LOG_EPS",
    "Function",
    "Tape",
    "TapeEntry",
    "Tensor",
    "active_tape",
    "add",
    "backward",
    "clamp",
    "clamped_log",
    "concat_cols",
    "elementwise",
    "exp",
    "gradcheck",
    "gradient_reversal",
    "log",
    "matmul",
    "mean",
    "mul",
    "neg",
    "numerical_gradient",
    "outer_flatten",
    "reduce",
    "relative_error",
    "relu",
    "sigmoid",
    "softmax_rows",
    "stop_gradient",
    "sub",
    "sum_",
]
