"""LSTM encoder-decoder for trajectory prediction."""

from typing import Iterator, Optional

from ..constants import Activation, ModelKind
from ..exceptions import ShapeMismatch
from ..latent import RecognitionNetTraj
from ..nn import Linear, LstmCell
from ..tensor import RngStream, Tensor, concat
from ..validation import ModelProfileConfig
from .base import ConditionalModel, Context
from .batch import SequenceBatch


class TrajectoryModel(ConditionalModel):
    """
    Encoder: dense ReLU embedding, LSTM. Decoder step: dense ReLU over
    concat(previous output, v, z), LSTM, linear 2-d head. The published sizes
    are embedding 32, LSTMs 48 and decoder embedding 64.
    """

    kind = ModelKind.TRAJECTORY
    batch_kind = "trajectory"

    def __init__(
        self,
        sizes: ModelProfileConfig,
        rng: RngStream,
        latent: Optional[int] = None,
        with_recognition: bool = True,
    ) -> None:
        latent = sizes.latent if latent is None else latent
        recognizer = None
        if with_recognition and latent > 0:
            recognizer = RecognitionNetTraj(
                sizes.recog_embed, sizes.recog_hidden, latent, rng.substream(10)
            )
        super().__init__((latent,), recognizer)
        self.hidden = sizes.hidden
        self.embed = Linear(2, sizes.embed, rng.substream(0), Activation.RELU)
        self.encoder = LstmCell(sizes.embed, sizes.hidden, rng.substream(1))
        dec_in = 2 + sizes.hidden + latent
        self.dec_embed = Linear(
            dec_in, sizes.dec_embed, rng.substream(2), Activation.RELU
        )
        self.decoder = LstmCell(sizes.dec_embed, sizes.hidden, rng.substream(3))
        self.out = Linear(sizes.hidden, 2, rng.substream(4))
        for name in ("embed", "encoder", "dec_embed", "decoder", "out"):
            self.add_child(name, getattr(self, name))

    def encode(self, batch: SequenceBatch) -> Context:
        return {"v": encode_context(self, batch.x), "last": batch.x[:, -1, :]}

    def decode_steps(
        self,
        context: Context,
        z: Tensor,
        t_fut: int,
        targets: Optional[Tensor] = None,
    ) -> Iterator[Tensor]:
        v, previous = context["v"], context["last"]
        self.check_latent(z, v.shape[0])
        state = self.decoder.initial_state(v.shape[0])
        for t in range(t_fut):
            step_input = self.dec_embed(concat([previous, v, z], axis=-1))
            state = self.decoder(step_input, state)
            output = self.out(state[0])
            yield output.reshape((output.shape[0], 1, 2))
            previous = targets[:, t, :] if targets is not None else output


def encode_context(m: TrajectoryModel, x: Tensor) -> Tensor:
    """
    Final encoder hidden state for observed displacements (T_obs, 2) or (B, T_obs, 2).

    Raises:
        ShapeMismatch: If ``x`` is not a non-empty 2-channel sequence
    """
    single = x.ndim == 2
    seq = x.reshape((1,) + x.shape) if single else x
    if seq.ndim != 3 or seq.shape[-1] != 2 or seq.shape[1] < 1:
        raise ShapeMismatch(f"encode_context: expected (B, T, 2), got {x.shape}")
    state = m.encoder.initial_state(seq.shape[0])
    for t in range(seq.shape[1]):
        state = m.encoder(m.embed(seq[:, t, :]), state)
    hidden = state[0]
    return hidden.reshape((m.hidden,)) if single else hidden


def decode_sequence(
    m: TrajectoryModel,
    v: Tensor,
    z: Tensor,
    t_fut: int,
    last_obs: Tensor,
    targets: Optional[Tensor] = None,
) -> Tensor:
    """
    Autoregressive rollout from summary ``v`` with one latent ``z`` for all steps.

    Unbatched inputs (H,), (L,), (2,) give a (T_fut, 2) result; batched
    inputs give (B, T_fut, 2).
    """
    single = v.ndim == 1
    if single:
        v, z, last_obs = (t.reshape((1,) + t.shape) for t in (v, z, last_obs))
        if targets is not None:
            targets = targets.reshape((1,) + targets.shape)
    if v.shape[-1] != m.hidden or last_obs.shape != (v.shape[0], 2):
        raise ShapeMismatch(
            f"decode_sequence: v {v.shape} / last_obs {last_obs.shape} "
            "do not fit the model"
        )
    out = m.decode({"v": v, "last": last_obs}, z, t_fut, targets)
    return out.reshape((t_fut, 2)) if single else out
