"""
Operation registry and the core op catalog.

Every op is a forward function returning ``(value, vjp)`` where ``vjp`` maps
the upstream gradient to one gradient per tensor input. Ops are registered
with the :func:`op` decorator; the returned wrapper handles tensor
conversion, the finite-value guard and tape recording.
"""

import functools
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from best_of_many.constants import Padding
from best_of_many.exceptions import (
    DomainError,
    EmptyInput,
    NumericalError,
    ShapeMismatch,
)

from .tape import VJP, active_tape
from .tensor import Tensor, as_tensor

ForwardFn = Callable[..., Tuple[np.ndarray, VJP]]
# An example generator returns (tensor inputs, keyword arguments) for grad checks.
ExampleFn = Callable[[Any], Tuple[List[np.ndarray], Dict[str, Any]]]


@dataclass(frozen=True)
class OpDef:
    name: str
    forward: ForwardFn
    example: Optional[ExampleFn] = None


class OpRegistry:
    """
    Registry of differentiable operations.
    """

    def __init__(self) -> None:
        self.ops: Dict[str, OpDef] = {}

    def register(self, op_def: OpDef) -> None:
        """
        Register an op in the registry.
        """
        if op_def.name in self.ops:
            raise ValueError(f"Op with name '{op_def.name}' already exists")
        self.ops[op_def.name] = op_def

    def get(self, name: str) -> OpDef:
        return self.ops[name]

    def names(self) -> List[str]:
        return sorted(self.ops)

    @contextmanager
    def patched(self, name: str, forward: ForwardFn) -> Iterator[None]:
        """Temporarily swap the forward/backward rule of ``name``."""
        original = self.ops[name]
        self.ops[name] = replace(original, forward=forward)
        try:
            yield
        finally:
            self.ops[name] = original


# Global registry instance
op_registry = OpRegistry()


def apply(name: str, inputs: Sequence[Any], kwargs: Dict[str, Any]) -> Tensor:
    """Run op ``name`` forward and record it on the active tape."""
    op_def = op_registry.get(name)
    tensors = [as_tensor(value) for value in inputs]
    with np.errstate(all="ignore"):
        value, vjp = op_def.forward(*[t.data for t in tensors], **kwargs)
    value = np.asarray(value)
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"Non-finite output from op '{name}'", {"op": name})

    result = Tensor.wrap(value)
    tape = active_tape()
    if tape is not None:
        parents = [tape.node_of(t) for t in tensors]
        if any(parent is not None for parent in parents):
            tape.record(result, name, parents, vjp)
    return result


def op(name: str, example: Optional[ExampleFn] = None) -> Callable[[ForwardFn], Any]:
    """
    Decorator to register a differentiable op.
    """

    def decorator(forward: ForwardFn) -> Callable[..., Tensor]:
        op_registry.register(OpDef(name=name, forward=forward, example=example))

        @functools.wraps(forward)
        def wrapper(*inputs: Any, **kwargs: Any) -> Tensor:
            return apply(name, inputs, kwargs)

        setattr(wrapper, "op_name", name)
        return wrapper

    return decorator


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` back down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(name: str, a: np.ndarray, b: np.ndarray) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(
            f"{name}: cannot broadcast {a.shape} with {b.shape}",
            {"left": list(a.shape), "right": list(b.shape)},
        )


# --- example generators used by the gradient checker ---


def _broadcast_pair(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3, 4)), rng.normal((4,))], {}


def _single(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((3, 4))], {}


def _positive(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.uniform((3, 4), low=0.5, high=2.0)], {}


def _denominator(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((3, 4)), rng.uniform((3, 4), low=0.5, high=2.0)], {}


# --- elementwise arithmetic ---


@op("add", example=_broadcast_pair)
def add(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, VJP]:
    _broadcast_shape("add", a, b)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return a + b, vjp


@op("sub", example=_broadcast_pair)
def sub(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, VJP]:
    _broadcast_shape("sub", a, b)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return a - b, vjp


@op("mul", example=_broadcast_pair)
def mul(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, VJP]:
    _broadcast_shape("mul", a, b)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g * b, a.shape), unbroadcast(g * a, b.shape)

    return a * b, vjp


@op("div", example=_denominator)
def div(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, VJP]:
    _broadcast_shape("div", a, b)
    if np.any(b == 0):
        raise DomainError("div: division by zero")

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g / b, a.shape), unbroadcast(-g * a / (b * b), b.shape)

    return a / b, vjp


@op("neg", example=_single)
def neg(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    return -a, lambda g: (-g,)


@op("square", example=_single)
def square(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    return a * a, lambda g: (2.0 * a * g,)


# --- nonlinearities ---


@op("tanh", example=_single)
def tanh(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    out = np.tanh(a)
    return out, lambda g: (g * (1.0 - out * out),)


@op("sigmoid", example=_single)
def sigmoid(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    # tanh form is stable for large |a|
    out = 0.5 * (1.0 + np.tanh(0.5 * a))
    return out, lambda g: (g * out * (1.0 - out),)


@op("relu", example=_single)
def relu(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    mask = a > 0
    return np.where(mask, a, 0.0).astype(a.dtype), lambda g: (g * mask,)


@op("exp", example=_single)
def exp(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    out = np.exp(a)
    return out, lambda g: (g * out,)


@op("log", example=_positive)
def log(a: np.ndarray) -> Tuple[np.ndarray, VJP]:
    if np.any(a <= 0):
        raise DomainError("log of non-positive value", {"min": float(np.min(a))})
    return np.log(a), lambda g: (g / a,)


# --- reductions ---


def _sum_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((3, 4))], {"axis": 1}


@op("sum", example=_sum_example)
def sum_(
    a: np.ndarray,
    *,
    axis: Optional[int | Tuple[int, ...]] = None,
    keepdims: bool = False,
) -> Tuple[np.ndarray, VJP]:
    out = np.sum(a, axis=axis, keepdims=keepdims)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return out, vjp


@op("mean", example=_sum_example)
def mean(
    a: np.ndarray,
    *,
    axis: Optional[int | Tuple[int, ...]] = None,
    keepdims: bool = False,
) -> Tuple[np.ndarray, VJP]:
    out = np.mean(a, axis=axis, keepdims=keepdims)
    count = a.size // (out.size or 1)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, a.shape).copy(),)

    return out, vjp


@op("max", example=_sum_example)
def max_(a: np.ndarray, *, axis: Optional[int] = None) -> Tuple[np.ndarray, VJP]:
    """Max over ``axis``; the subgradient goes to the first maximal index."""
    if a.size == 0:
        raise EmptyInput("max of an empty tensor")
    if axis is None:
        index = int(np.argmax(a))

        def vjp_flat(g: np.ndarray) -> Tuple[np.ndarray]:
            grad = np.zeros(a.size, dtype=a.dtype)
            grad[index] = g
            return (grad.reshape(a.shape),)

        return np.asarray(a.reshape(-1)[index]), vjp_flat

    indices = np.expand_dims(np.argmax(a, axis=axis), axis)
    out = np.take_along_axis(a, indices, axis=axis).squeeze(axis)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros_like(a)
        np.put_along_axis(grad, indices, np.expand_dims(g, axis), axis=axis)
        return (grad,)

    return out, vjp


def _logsumexp_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 5), std=3.0)], {"axis": -1}


@op("logsumexp", example=_logsumexp_example)
def logsumexp(v: np.ndarray, *, axis: int = -1) -> Tuple[np.ndarray, VJP]:
    """``max(v) + log(sum(exp(v - max(v))))``; finite for any finite ``v``."""
    if v.ndim == 0 or v.shape[axis] == 0:
        raise EmptyInput("logsumexp needs at least one element")
    peak = np.max(v, axis=axis, keepdims=True)
    total = np.sum(np.exp(v - peak), axis=axis, keepdims=True)
    out = np.squeeze(peak + np.log(total), axis=axis)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        return (np.expand_dims(g, axis) * np.exp(v - peak) / total,)

    return out, vjp


# --- structure ---


def _concat_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3)), rng.normal((2, 2)), rng.normal((2, 1))], {"axis": -1}


@op("concat", example=_concat_example)
def _concat(*arrays: np.ndarray, axis: int = -1) -> Tuple[np.ndarray, VJP]:
    try:
        out = np.concatenate(arrays, axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"concat: {e}")
    bounds = np.cumsum([a.shape[axis] for a in arrays])[:-1]

    def vjp(g: np.ndarray) -> List[np.ndarray]:
        return list(np.split(g, bounds, axis=axis))

    return out, vjp


def concat(tensors: Sequence[Any], axis: int = -1) -> Tensor:
    """Concatenate tensors along ``axis``."""
    return _concat(*tensors, axis=axis)


def _slice_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((3, 6))], {"index": (slice(None), slice(1, 4))}


@op("slice", example=_slice_example)
def slice_(a: np.ndarray, *, index: Any) -> Tuple[np.ndarray, VJP]:
    """Basic (view) indexing; advanced indexing is not supported."""
    out = a[index]

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros_like(a)
        grad[index] += g
        return (grad,)

    return np.array(out, copy=True), vjp


def _reshape_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((3, 4))], {"shape": (2, 6)}


@op("reshape", example=_reshape_example)
def reshape(a: np.ndarray, *, shape: Tuple[int, ...]) -> Tuple[np.ndarray, VJP]:
    try:
        out = a.reshape(shape)
    except ValueError as e:
        raise ShapeMismatch(f"reshape: {e}")
    return out.copy(), lambda g: (g.reshape(a.shape),)


def _transpose_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3, 4))], {"axes": (2, 0, 1)}


@op("transpose", example=_transpose_example)
def transpose(
    a: np.ndarray, *, axes: Optional[Tuple[int, ...]] = None
) -> Tuple[np.ndarray, VJP]:
    out = np.transpose(a, axes)
    inverse = None if axes is None else tuple(np.argsort(axes))
    return np.ascontiguousarray(out), lambda g: (np.transpose(g, inverse),)


def _repeat_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3))], {"reps": 3}


@op("repeat_leading", example=_repeat_example)
def repeat_leading(a: np.ndarray, *, reps: int) -> Tuple[np.ndarray, VJP]:
    """Stack ``reps`` copies of ``a`` along a new leading axis."""
    out = np.broadcast_to(a[None], (reps,) + a.shape).copy()
    return out, lambda g: (g.sum(axis=0),)


# --- linear algebra ---


def _matmul_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((3, 4)), rng.normal((4, 2))], {}


@op("matmul", example=_matmul_example)
def matmul(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, VJP]:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(
            f"matmul: cannot multiply {a.shape} by {b.shape}",
            {"left": list(a.shape), "right": list(b.shape)},
        )

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return g @ b.T, a.T @ g

    return a @ b, vjp


def _bias_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3, 4, 4)), rng.normal((3,))], {"axis": 1}


@op("bias_add", example=_bias_example)
def bias_add(x: np.ndarray, b: np.ndarray, *, axis: int = -1) -> Tuple[np.ndarray, VJP]:
    """Add a 1-D bias along ``axis`` of ``x``."""
    axis = axis % x.ndim
    if b.ndim != 1 or b.shape[0] != x.shape[axis]:
        raise ShapeMismatch(
            f"bias_add: bias of shape {b.shape} does not fit axis {axis} of {x.shape}"
        )
    shape = [1] * x.ndim
    shape[axis] = b.shape[0]
    others = tuple(i for i in range(x.ndim) if i != axis)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return g, g.sum(axis=others)

    return x + b.reshape(shape), vjp


def _conv_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 2, 5, 5)), rng.normal((3, 2, 3, 3))], {"padding": "same"}


@op("conv2d", example=_conv_example)
def conv2d(
    x: np.ndarray, k: np.ndarray, *, padding: Padding | str = Padding.SAME
) -> Tuple[np.ndarray, VJP]:
    """
    2-D cross-correlation of ``x`` (C,H,W) or (B,C,H,W) with ``k`` (O,C,kh,kw).

    Same padding zero-pads ``kh // 2`` rows and ``kw // 2`` columns on each side.
    """
    padding = Padding(padding)
    single = x.ndim == 3
    xb = x[None] if single else x
    if xb.ndim != 4 or k.ndim != 4 or xb.shape[1] != k.shape[1]:
        raise ShapeMismatch(
            f"conv2d: input {x.shape} does not match kernel {k.shape}",
            {"input": list(x.shape), "kernel": list(k.shape)},
        )
    batch, channels, height, width = xb.shape
    filters, _, kh, kw = k.shape
    if padding is Padding.SAME:
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeMismatch(f"conv2d: same padding needs odd kernel, got {kh}x{kw}")
        ph, pw = kh // 2, kw // 2
    else:
        ph = pw = 0
        if height < kh or width < kw:
            raise ShapeMismatch(
                f"conv2d: kernel {kh}x{kw} larger than {height}x{width}"
            )
    padded = np.pad(xb, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    out_h = padded.shape[2] - kh + 1
    out_w = padded.shape[3] - kw + 1

    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(-1, channels * kh * kw)
    kernel = k.reshape(filters, -1)
    out = (cols @ kernel.T).reshape(batch, out_h, out_w, filters).transpose(0, 3, 1, 2)

    def vjp(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        gb = g[None] if single else g
        gmat = gb.transpose(0, 2, 3, 1).reshape(-1, filters)
        grad_k = (gmat.T @ cols).reshape(k.shape)
        gcols = (gmat @ kernel).reshape(batch, out_h, out_w, channels, kh, kw)
        grad_padded = np.zeros_like(padded)
        for i in range(kh):
            for j in range(kw):
                grad_padded[:, :, i : i + out_h, j : j + out_w] += gcols[
                    :, :, :, :, i, j
                ].transpose(0, 3, 1, 2)
        grad_x = grad_padded[:, :, ph : ph + height, pw : pw + width]
        return (grad_x[0] if single else grad_x), grad_k

    out = np.ascontiguousarray(out)
    return (out[0] if single else out), vjp


# --- operator sugar on Tensor ---


def _getitem(self: Tensor, index: Any) -> Tensor:
    return slice_(self, index=index)


Tensor.__add__ = lambda self, other: add(self, other)  # type: ignore[method-assign]
Tensor.__radd__ = lambda self, other: add(other, self)  # type: ignore[attr-defined]
Tensor.__sub__ = lambda self, other: sub(self, other)  # type: ignore[attr-defined]
Tensor.__rsub__ = lambda self, other: sub(other, self)  # type: ignore[attr-defined]
Tensor.__mul__ = lambda self, other: mul(self, other)  # type: ignore[attr-defined]
Tensor.__rmul__ = lambda self, other: mul(other, self)  # type: ignore[attr-defined]
Tensor.__truediv__ = lambda self, other: div(self, other)  # type: ignore[attr-defined]
Tensor.__rtruediv__ = lambda self, other: div(other, self)  # type: ignore[attr-defined]
Tensor.__neg__ = lambda self: neg(self)  # type: ignore[attr-defined]
Tensor.__matmul__ = lambda self, other: matmul(  # type: ignore[attr-defined]
    self, other
)
Tensor.__getitem__ = _getitem  # type: ignore[attr-defined]


def _method(fn: Callable[..., Tensor]) -> Callable[..., Tensor]:
    @functools.wraps(fn)
    def method(self: Tensor, **kwargs: Any) -> Tensor:
        return fn(self, **kwargs)

    return method


Tensor.sum = _method(sum_)  # type: ignore[attr-defined]
Tensor.mean = _method(mean)  # type: ignore[attr-defined]
Tensor.max = _method(max_)  # type: ignore[attr-defined]
Tensor.exp = _method(exp)  # type: ignore[attr-defined]
Tensor.log = _method(log)  # type: ignore[attr-defined]
Tensor.tanh = _method(tanh)  # type: ignore[attr-defined]
Tensor.sigmoid = _method(sigmoid)  # type: ignore[attr-defined]
Tensor.relu = _method(relu)  # type: ignore[attr-defined]
Tensor.square = _method(square)  # type: ignore[attr-defined]


def _reshape_method(self: Tensor, *shape: Any) -> Tensor:
    if len(shape) == 1 and isinstance(shape[0], tuple):
        shape = tuple(shape[0])
    return reshape(self, shape=shape)


Tensor.reshape = _reshape_method  # type: ignore[attr-defined]
Tensor.transpose = lambda self, *axes: transpose(  # type: ignore[attr-defined]
    self, axes=tuple(axes) if axes else None
)
