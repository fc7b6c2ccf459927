"""Dense and convolutional layers, pooling and upsampling."""

from typing import Any, Dict, List, Tuple

import numpy as np

from best_of_many.constants import Activation, Padding
from best_of_many.exceptions import ShapeMismatch
from best_of_many.tensor import (
    RngStream,
    Tensor,
    bias_add,
    conv2d,
    matmul,
    op,
    transpose,
)
from best_of_many.tensor.tape import VJP

from .base import Module
from .init import conv_kernel, dense_weight


def activate(x: Tensor, activation: Activation | str) -> Tensor:
    activation = Activation(activation)
    if activation is Activation.RELU:
        return x.relu()
    if activation is Activation.TANH:
        return x.tanh()
    return x


def linear(
    W: Tensor, b: Tensor, x: Tensor, activation: Activation | str = Activation.NONE
) -> Tensor:
    """
    Compute ``activation(W x + b)`` for ``x`` of shape (I,) or (B, I).

    Raises:
        ShapeMismatch: If ``x`` does not end in W's input extent
    """
    if W.ndim != 2 or x.shape[-1:] != W.shape[1:] or b.shape != W.shape[:1]:
        raise ShapeMismatch(
            f"linear: W {W.shape}, b {b.shape} cannot map input {x.shape}",
            {"weight": list(W.shape), "input": list(x.shape)},
        )
    single = x.ndim == 1
    rows = x.reshape((1, x.shape[0])) if single else x
    out = bias_add(matmul(rows, transpose(W)), b, axis=-1)
    out = activate(out, activation)
    return out.reshape(W.shape[:1]) if single else out


class Linear(Module):
    """Dense layer with weight (out, in) and bias (out,)."""

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: RngStream,
        activation: Activation | str = Activation.NONE,
    ) -> None:
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.activation = Activation(activation)
        self.W = self.add_param("W", dense_weight(out_features, in_features, rng))
        self.b = self.add_param("b", np.zeros(out_features))

    def __call__(self, x: Tensor) -> Tensor:
        return linear(self.W, self.b, x, self.activation)


class Conv2d(Module):
    """Same-padded 2-D convolution with per-filter bias."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: RngStream,
        kernel: int = 3,
        activation: Activation | str = Activation.NONE,
    ) -> None:
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.activation = Activation(activation)
        self.K = self.add_param(
            "K", conv_kernel(out_channels, in_channels, kernel, rng)
        )
        self.b = self.add_param("b", np.zeros(out_channels))

    def __call__(self, x: Tensor) -> Tensor:
        out = bias_add(conv2d(x, self.K, padding=Padding.SAME), self.b, axis=-3)
        return activate(out, self.activation)


def _check_even(name: str, x: np.ndarray) -> Tuple[int, int]:
    if x.ndim < 2:
        raise ShapeMismatch(f"{name}: needs at least 2 dimensions, got {x.shape}")
    height, width = x.shape[-2:]
    if height % 2 or width % 2:
        raise ShapeMismatch(
            f"{name}: spatial extents must be even, got {height}x{width}",
            {"shape": list(x.shape)},
        )
    return height // 2, width // 2


def _pool_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3, 4, 6))], {}


def _upsample_example(rng: Any) -> Tuple[List[np.ndarray], Dict[str, Any]]:
    return [rng.normal((2, 3, 3, 2))], {}


@op("maxpool2", example=_pool_example)
def maxpool2(x: np.ndarray) -> Tuple[np.ndarray, VJP]:
    """2x2 max pooling with stride 2; ties go to the first element (row-major)."""
    half_h, half_w = _check_even("maxpool2", x)
    lead = x.shape[:-2]
    blocks = (
        x.reshape(lead + (half_h, 2, half_w, 2))
        .swapaxes(-3, -2)
        .reshape(lead + (half_h, half_w, 4))
    )
    index = np.argmax(blocks, axis=-1)[..., None]
    out = np.take_along_axis(blocks, index, axis=-1)[..., 0]

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros_like(blocks)
        np.put_along_axis(grad, index, g[..., None], axis=-1)
        grad = grad.reshape(lead + (half_h, half_w, 2, 2)).swapaxes(-3, -2)
        return (grad.reshape(x.shape),)

    return out, vjp


@op("upsample2", example=_upsample_example)
def upsample2(x: np.ndarray) -> Tuple[np.ndarray, VJP]:
    """Nearest-neighbour 2x upsampling of the last two axes."""
    if x.ndim < 2:
        raise ShapeMismatch(f"upsample2: needs at least 2 dimensions, got {x.shape}")
    out = np.repeat(np.repeat(x, 2, axis=-2), 2, axis=-1)
    lead = x.shape[:-2]
    height, width = x.shape[-2:]

    def vjp(g: np.ndarray) -> Tuple[np.ndarray]:
        return (g.reshape(lead + (height, 2, width, 2)).sum(axis=(-3, -1)),)

    return out, vjp


def flatten(x: Tensor, keep: int = 1) -> Tensor:
    """Collapse all but the first ``keep`` axes."""
    lead = x.shape[:keep]
    return x.reshape(lead + (int(np.prod(x.shape[keep:])),))


def maybe_batch(x: Tensor, ndim: int) -> Tuple[Tensor, bool]:
    """Add a leading batch axis when ``x`` has ``ndim - 1`` dimensions."""
    if x.ndim == ndim - 1:
        return x.reshape((1,) + x.shape), True
    return x, False
