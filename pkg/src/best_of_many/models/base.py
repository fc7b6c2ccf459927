import math
from abc import ABC, abstractmethod
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..constants import LatentSource, ModelKind
from ..exceptions import ConfigError, MissingY, ShapeMismatch
from ..latent import GaussianLatent, recognize, reparameterize
from ..nn import Module
from ..tensor import RngStream, Tensor, concat, repeat_leading
from .batch import BatchKind, SequenceBatch

Context = Dict[str, Tensor]


def tile(tensor: Tensor, reps: int) -> Tensor:
    """Repeat a (B, ...) tensor into (reps * B, ...), sample-major."""
    if reps == 1:
        return tensor
    stacked = repeat_leading(tensor, reps=reps)
    return stacked.reshape((reps * tensor.shape[0],) + tensor.shape[1:])


class ConditionalModel(Module, ABC):
    """
    Conditional generative model p(y | x, z) with an optional recognition
    network q(z | y).

    Subclasses encode the observation into a context once; sampling many
    futures tiles that context sample-major, so row ``i * B + b`` of a rollout
    belongs to sample ``i`` of example ``b``.
    """

    kind: ModelKind
    batch_kind: BatchKind

    def __init__(
        self, latent_shape: Tuple[int, ...], recognizer: Optional[Module]
    ) -> None:
        super().__init__()
        self.latent_shape = tuple(latent_shape)
        self.recognizer = recognizer
        if recognizer is not None:
            self.add_child("recognizer", recognizer)

    @property
    def latent_size(self) -> int:
        return int(math.prod(self.latent_shape))

    @abstractmethod
    def encode(self, batch: SequenceBatch) -> Context:
        """Deterministic summary of the observed part of ``batch``."""

    @abstractmethod
    def decode_steps(
        self,
        context: Context,
        z: Tensor,
        t_fut: int,
        targets: Optional[Tensor] = None,
    ) -> Iterator[Tensor]:
        """
        Yield one (N, 1, ...) prediction per future step.

        ``targets`` replaces the previous prediction as the next step's input
        (teacher forcing) for models that feed their output back.
        """

    def decode(
        self,
        context: Context,
        z: Tensor,
        t_fut: int,
        targets: Optional[Tensor] = None,
    ) -> Tensor:
        return concat(list(self.decode_steps(context, z, t_fut, targets)), axis=1)

    def recognize(self, batch: SequenceBatch) -> GaussianLatent:
        if self.recognizer is None:
            raise ConfigError(
                f"{self.kind.value} model was built without a recognition network"
            )
        if batch.y is None:
            raise MissingY("Recognition sampling needs the future sequence y")
        return recognize(self.recognizer, batch.y)

    def check_latent(self, z: Tensor, rows: int) -> None:
        if z.shape != (rows,) + self.latent_shape:
            raise ShapeMismatch(
                f"latent: expected {(rows,) + self.latent_shape}, got {z.shape}"
            )

    def draw_latents(
        self,
        batch_size: int,
        reps: int,
        rng: RngStream,
        gaussian: Optional[GaussianLatent] = None,
    ) -> Tensor:
        """
        Draw ``reps`` latents per example, sample ``i`` from ``rng.substream(i)``.

        Without ``gaussian`` the draws come from the N(0, I) prior; otherwise
        they are reparameterized samples of ``gaussian``.
        """
        shape = (batch_size,) + self.latent_shape
        draws = [rng.substream(i).normal(shape) for i in range(reps)]
        noise = np.concatenate(draws, axis=0)
        if gaussian is None:
            return Tensor(noise)
        tiled = GaussianLatent(tile(gaussian.mu, reps), tile(gaussian.log_var, reps))
        return reparameterize(tiled, noise=noise)

    def predict(
        self,
        batch: SequenceBatch,
        z: Tensor,
        reps: int = 1,
        teacher_forcing: bool = False,
        t_fut: Optional[int] = None,
    ) -> Tensor:
        """Roll out ``reps`` futures per example for sample-major latents ``z``."""
        steps = t_fut or batch.t_fut
        if steps is None:
            raise MissingY("t_fut is needed when the batch has no future sequence")
        self.check_latent(z, reps * batch.size)
        encoded = self.encode(batch)
        context = {name: tile(value, reps) for name, value in encoded.items()}
        targets = None
        if teacher_forcing and batch.y is not None:
            targets = tile(batch.y, reps)
        return self.decode(context, z, steps, targets)


def sample_futures(
    m: ConditionalModel,
    batch: SequenceBatch,
    t_samples: int,
    rng: RngStream,
    source: LatentSource | str = LatentSource.PRIOR,
    t_fut: Optional[int] = None,
) -> List[Tensor]:
    """
    Draw ``t_samples`` futures per example, each with its own latent.

    Returns one (B, T_fut, ...) tensor per sample.

    Raises:
        MissingY: If ``source`` is recognition and the batch has no ``y``
    """
    source = LatentSource(source)
    gaussian = None
    if source is LatentSource.RECOGNITION:
        if batch.y is None:
            raise MissingY("Recognition sampling needs the future sequence y")
        gaussian = m.recognize(batch)
    z = m.draw_latents(batch.size, t_samples, rng, gaussian)
    futures = m.predict(batch, z, reps=t_samples, t_fut=t_fut).detach()
    size = batch.size
    return [
        Tensor.wrap(futures.data[i * size : (i + 1) * size]) for i in range(t_samples)
    ]
