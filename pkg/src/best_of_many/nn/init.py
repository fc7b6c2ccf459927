"""Parameter initialization."""

import math
from typing import Tuple

import numpy as np

from best_of_many.tensor import RngStream


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return math.sqrt(6.0 / (fan_in + fan_out))


def glorot_uniform(
    shape: Tuple[int, ...], rng: RngStream, fan_in: int, fan_out: int
) -> np.ndarray:
    """Draw ``U(-a, a)`` with ``a = sqrt(6 / (fan_in + fan_out))``."""
    bound = glorot_bound(fan_in, fan_out)
    return rng.uniform(shape, low=-bound, high=bound)


def dense_weight(out_features: int, in_features: int, rng: RngStream) -> np.ndarray:
    return glorot_uniform((out_features, in_features), rng, in_features, out_features)


def conv_kernel(
    out_channels: int, in_channels: int, kernel: int, rng: RngStream
) -> np.ndarray:
    receptive = kernel * kernel
    return glorot_uniform(
        (out_channels, in_channels, kernel, kernel),
        rng,
        in_channels * receptive,
        out_channels * receptive,
    )


def lstm_bias(hidden: int, forget_bias: float = 1.0) -> np.ndarray:
    """Zero bias for gates i,f,g,o with the forget block set to ``forget_bias``."""
    bias = np.zeros(4 * hidden)
    bias[hidden : 2 * hidden] = forget_bias
    return bias
