"""
Gaussian latent variables: recognition networks q(z|y), the standard normal
prior, reparameterized sampling and the closed-form KL divergence.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from .constants import Activation
from .exceptions import ShapeMismatch
from .nn import Conv2d, ConvLstmCell, Linear, LstmCell, Module, maxpool2
from .tensor import RngStream, Tensor, as_tensor, exp, sum_

if TYPE_CHECKING:
    from .models.batch import SequenceBatch


@dataclass
class GaussianLatent:
    """
    Diagonal Gaussian given by its mean and log-variance.

    Both tensors share a shape: (B, L) for vector latents or (B, C, H', W')
    for spatial latents on the Conv-LSTM bottleneck grid.
    """

    mu: Tensor
    log_var: Tensor

    def __post_init__(self) -> None:
        if self.mu.shape != self.log_var.shape:
            raise ShapeMismatch(
                f"mu {self.mu.shape} and log_var {self.log_var.shape} differ"
            )

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.mu.shape

    @property
    def std(self) -> Tensor:
        return exp(self.log_var * 0.5)


class RecognitionNetTraj(Module):
    """Recognition network over a future trajectory: dense ReLU, LSTM, dense heads."""

    def __init__(self, embed: int, hidden: int, latent: int, rng: RngStream) -> None:
        super().__init__()
        self.latent = latent
        self.embed = Linear(2, embed, rng.substream(0), Activation.RELU)
        self.lstm = LstmCell(embed, hidden, rng.substream(1))
        self.mu_head = Linear(hidden, latent, rng.substream(2))
        self.log_var_head = Linear(hidden, latent, rng.substream(3))
        for name in ("embed", "lstm", "mu_head", "log_var_head"):
            self.add_child(name, getattr(self, name))

    def __call__(self, y: Tensor) -> GaussianLatent:
        if y.ndim != 3 or y.shape[-1] != 2 or y.shape[1] < 1:
            raise ShapeMismatch(f"recognize: expected (B, T, 2) future, got {y.shape}")
        state = self.lstm.initial_state(y.shape[0])
        for t in range(y.shape[1]):
            state = self.lstm(self.embed(y[:, t, :]), state)
        hidden = state[0]
        return GaussianLatent(self.mu_head(hidden), self.log_var_head(hidden))


class RecognitionNetImage(Module):
    """
    Recognition network over future frames: conv embedding, pool, Conv-LSTM,
    pool, Conv-LSTM, then two 3x3 conv heads sharing the final hidden state.
    """

    def __init__(
        self,
        embed: int,
        hidden: Tuple[int, int],
        latent_channels: int,
        rng: RngStream,
    ) -> None:
        super().__init__()
        self.latent_channels = latent_channels
        self.embed = Conv2d(1, embed, rng.substream(0), activation=Activation.RELU)
        self.lstm1 = ConvLstmCell(embed, hidden[0], rng.substream(1))
        self.lstm2 = ConvLstmCell(hidden[0], hidden[1], rng.substream(2))
        self.mu_head = Conv2d(hidden[1], latent_channels, rng.substream(3))
        self.log_var_head = Conv2d(hidden[1], latent_channels, rng.substream(4))
        for name in ("embed", "lstm1", "lstm2", "mu_head", "log_var_head"):
            self.add_child(name, getattr(self, name))

    def __call__(self, y: Tensor) -> GaussianLatent:
        if y.ndim != 4 or y.shape[1] < 1 or y.shape[2] % 4 or y.shape[3] % 4:
            raise ShapeMismatch(
                f"recognize: expected (B, T, H, W) frames with H, W divisible by 4, "
                f"got {y.shape}"
            )
        batch, steps, height, width = y.shape
        state1 = self.lstm1.initial_state(batch, height // 2, width // 2)
        state2 = self.lstm2.initial_state(batch, height // 4, width // 4)
        for t in range(steps):
            frame = y[:, t : t + 1, :, :]
            state1 = self.lstm1(maxpool2(self.embed(frame)), state1)
            state2 = self.lstm2(maxpool2(state1[0]), state2)
        hidden = state2[0]
        return GaussianLatent(self.mu_head(hidden), self.log_var_head(hidden))


def recognize(net: Module, y: "Tensor | SequenceBatch") -> GaussianLatent:
    """
    Map a future sequence to the parameters of q(z|y).

    Accepts the future tensor itself or a batch carrying it.

    Raises:
        ShapeMismatch: If the future has the wrong layout
    """
    future = y if isinstance(y, Tensor) else y.y
    if future is None:
        raise ShapeMismatch("recognize: batch has no future sequence")
    return net(future)  # type: ignore[operator, no-any-return]


def reparameterize(
    g: GaussianLatent,
    rng: Optional[RngStream] = None,
    noise: Optional[np.ndarray] = None,
) -> Tensor:
    """
    Draw ``z = mu + exp(log_var / 2) * eps`` with ``eps ~ N(0, I)``.

    ``noise`` supplies ``eps`` directly; otherwise it is drawn from ``rng``.
    """
    if noise is None:
        if rng is None:
            raise ValueError("reparameterize needs rng or noise")
        noise = rng.normal(g.shape)
    eps = as_tensor(np.asarray(noise))
    if eps.shape != g.shape:
        raise ShapeMismatch(f"noise {eps.shape} does not match latent {g.shape}")
    return g.mu + g.std * eps


def _kl_terms(g: GaussianLatent) -> Tensor:
    return g.mu.square() + exp(g.log_var) - 1.0 - g.log_var


def kl_standard_normal(g: GaussianLatent) -> Tensor:
    """``0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2)`` over every entry."""
    return sum_(_kl_terms(g)) * 0.5


def kl_per_example(g: GaussianLatent) -> Tensor:
    """KL divergence to N(0, I) per leading (batch) index."""
    terms = _kl_terms(g)
    return sum_(terms, axis=tuple(range(1, terms.ndim))) * 0.5


def prior_sample(shape: Tuple[int, ...], rng: RngStream) -> Tensor:
    """Standard normal latent of ``shape``."""
    return Tensor(rng.normal(shape))


__all__ = [
    "GaussianLatent",
    "RecognitionNetImage",
    "RecognitionNetTraj",
    "kl_per_example",
    "kl_standard_normal",
    "prior_sample",
    "recognize",
    "reparameterize",
]
