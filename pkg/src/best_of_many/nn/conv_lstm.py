from typing import Tuple

import numpy as np

from best_of_many.constants import Padding
from best_of_many.exceptions import ShapeMismatch
from best_of_many.tensor import RngStream, Tensor, bias_add, conv2d

from .base import Module
from .init import conv_kernel, lstm_bias

State = Tuple[Tensor, Tensor]


class ConvLstmCell(Module):
    """
    Convolutional LSTM cell: the LSTM gate algebra with same-padded
    convolutions in place of matrix products, so hidden and cell states are
    (F, H, W) grids.
    """

    def __init__(
        self,
        in_channels: int,
        filters: int,
        rng: RngStream,
        kernel: int = 3,
        forget_bias: float = 1.0,
    ) -> None:
        super().__init__()
        self.in_channels = in_channels
        self.filters = filters
        self.kernel = kernel
        self.K_x = self.add_param(
            "K_x", conv_kernel(4 * filters, in_channels, kernel, rng.substream(0))
        )
        self.K_h = self.add_param(
            "K_h", conv_kernel(4 * filters, filters, kernel, rng.substream(1))
        )
        self.b = self.add_param("b", lstm_bias(filters, forget_bias))

    def initial_state(self, batch: int, height: int, width: int) -> State:
        zeros = np.zeros((batch, self.filters, height, width))
        return Tensor(zeros), Tensor(zeros)

    def __call__(self, x: Tensor, state: State) -> State:
        return conv_lstm_step(self, x, state[0], state[1])


def conv_lstm_step(p: ConvLstmCell, x_t: Tensor, h: Tensor, c: Tensor) -> State:
    """
    Advance one step on (C, H, W) inputs with (F, H, W) states, or their
    batched (B, ...) forms.

    Raises:
        ShapeMismatch: If channels or spatial extents disagree
    """
    filters = p.filters
    if (
        x_t.ndim not in (3, 4)
        or x_t.shape[-3] != p.in_channels
        or h.shape[-3] != filters
        or c.shape != h.shape
        or x_t.shape[-2:] != h.shape[-2:]
        or x_t.shape[:-3] != h.shape[:-3]
    ):
        raise ShapeMismatch(
            f"conv_lstm_step: input {x_t.shape} and state {h.shape}/{c.shape} "
            f"do not fit cell {p.in_channels}->{filters}"
        )

    gates = conv2d(x_t, p.K_x, padding=Padding.SAME) + conv2d(
        h, p.K_h, padding=Padding.SAME
    )
    gates = bias_add(gates, p.b, axis=-3)
    i = gates[..., 0:filters, :, :].sigmoid()
    f = gates[..., filters : 2 * filters, :, :].sigmoid()
    g = gates[..., 2 * filters : 3 * filters, :, :].tanh()
    o = gates[..., 3 * filters :, :, :].sigmoid()

    c_next = f * c + i * g
    h_next = o * c_next.tanh()
    return h_next, c_next
