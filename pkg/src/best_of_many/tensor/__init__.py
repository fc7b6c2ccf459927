from .gradcheck import GradCheckReport, check_op, check_registered_ops, grad_check
from .ops import (
    add,
    bias_add,
    concat,
    conv2d,
    div,
    exp,
    log,
    logsumexp,
    matmul,
    max_,
    mean,
    mul,
    neg,
    op,
    op_registry,
    relu,
    repeat_leading,
    reshape,
    sigmoid,
    slice_,
    square,
    sub,
    sum_,
    tanh,
    transpose,
)
from .rng import RngStream
from .tape import Gradients, Tape, active_tape, backward
from .tensor import Tensor, as_tensor, default_dtype, use_dtype

__all__ = [
    "GradCheckReport",
    "Gradients",
    "RngStream",
    "Tape",
    "Tensor",
    "active_tape",
    "add",
    "as_tensor",
    "backward",
    "bias_add",
    "check_op",
    "check_registered_ops",
    "concat",
    "conv2d",
    "default_dtype",
    "div",
    "exp",
    "grad_check",
    "log",
    "logsumexp",
    "matmul",
    "max_",
    "mean",
    "mul",
    "neg",
    "op",
    "op_registry",
    "relu",
    "repeat_leading",
    "reshape",
    "sigmoid",
    "slice_",
    "square",
    "sub",
    "sum_",
    "tanh",
    "transpose",
    "use_dtype",
]
