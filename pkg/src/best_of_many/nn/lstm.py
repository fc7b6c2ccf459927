from typing import Tuple

import numpy as np

from best_of_many.exceptions import ShapeMismatch
from best_of_many.tensor import RngStream, Tensor, bias_add, matmul, transpose

from .base import Module
from .init import dense_weight, lstm_bias

State = Tuple[Tensor, Tensor]


class LstmCell(Module):
    """
    LSTM cell without peepholes.

    Gate blocks are stacked in the order input, forget, cell candidate, output:
    ``W_x`` is (4H, D_in), ``W_h`` is (4H, H) and ``b`` is (4H,).
    """

    def __init__(
        self,
        input_size: int,
        hidden_size: int,
        rng: RngStream,
        forget_bias: float = 1.0,
    ) -> None:
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.W_x = self.add_param(
            "W_x", dense_weight(4 * hidden_size, input_size, rng.substream(0))
        )
        self.W_h = self.add_param(
            "W_h", dense_weight(4 * hidden_size, hidden_size, rng.substream(1))
        )
        self.b = self.add_param("b", lstm_bias(hidden_size, forget_bias))

    def initial_state(self, batch: int) -> State:
        zeros = np.zeros((batch, self.hidden_size))
        return Tensor(zeros), Tensor(zeros)

    def __call__(self, x: Tensor, state: State) -> State:
        return lstm_step(self, x, state[0], state[1])


def lstm_step(p: LstmCell, x_t: Tensor, h: Tensor, c: Tensor) -> State:
    """
    Advance one step: ``c' = f*c + i*g`` and ``h' = o*tanh(c')``.

    Inputs are (D_in,) / (H,) vectors or (B, D_in) / (B, H) batches.

    Raises:
        ShapeMismatch: If input or state extents disagree with the cell
    """
    hidden = p.hidden_size
    if (
        x_t.shape[-1:] != (p.input_size,)
        or h.shape[-1:] != (hidden,)
        or c.shape != h.shape
        or x_t.shape[:-1] != h.shape[:-1]
    ):
        raise ShapeMismatch(
            f"lstm_step: input {x_t.shape} and state {h.shape}/{c.shape} "
            f"do not fit cell {p.input_size}->{hidden}"
        )
    single = x_t.ndim == 1
    if single:
        x_t, h, c = (t.reshape((1,) + t.shape) for t in (x_t, h, c))

    gates = matmul(x_t, transpose(p.W_x)) + matmul(h, transpose(p.W_h))
    gates = bias_add(gates, p.b, axis=-1)
    i = gates[:, 0:hidden].sigmoid()
    f = gates[:, hidden : 2 * hidden].sigmoid()
    g = gates[:, 2 * hidden : 3 * hidden].tanh()
    o = gates[:, 3 * hidden :].sigmoid()

    c_next = f * c + i * g
    h_next = o * c_next.tanh()
    if single:
        return h_next.reshape((hidden,)), c_next.reshape((hidden,))
    return h_next, c_next
