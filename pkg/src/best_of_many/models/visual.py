"""Trajectory model conditioned on a scene image."""

from typing import Iterator, Optional

from ..constants import Activation, ModelKind
from ..exceptions import ShapeMismatch
from ..latent import RecognitionNetTraj
from ..nn import CnnEncoder, Linear, LstmCell
from ..tensor import RngStream, Tensor, concat
from ..validation import ModelProfileConfig
from .base import ConditionalModel, Context
from .batch import SequenceBatch
from .trajectory import encode_context


class VisualTrajectoryModel(ConditionalModel):
    """
    Trajectory encoder plus a CNN scene encoder. The encoder summary and the
    visual summary are merged by a dense layer once per sequence; every
    decoder step embeds concat(previous output, merged summary, z) before
    the decoder LSTM.
    """

    kind = ModelKind.VISUAL_TRAJECTORY
    batch_kind = "trajectory"

    def __init__(
        self,
        sizes: ModelProfileConfig,
        rng: RngStream,
        map_size: int = 64,
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
        self.map_size = map_size
        self.embed = Linear(2, sizes.embed, rng.substream(0), Activation.RELU)
        self.encoder = LstmCell(sizes.embed, sizes.hidden, rng.substream(1))
        self.cnn = CnnEncoder(
            1,
            (map_size, map_size),
            rng.substream(5),
            filters=sizes.cnn_filters,
            hidden=sizes.cnn_hidden,
            out_features=sizes.cnn_out,
        )
        width = sizes.visual_dec_embed
        relu = Activation.RELU
        merged = sizes.hidden + sizes.cnn_out
        self.merge = Linear(merged, width, rng.substream(6), relu)
        self.dec_embed = Linear(2 + width + latent, width, rng.substream(2), relu)
        self.decoder = LstmCell(width, sizes.visual_hidden, rng.substream(3))
        self.out = Linear(sizes.visual_hidden, 2, rng.substream(4))
        for name in ("embed", "encoder", "cnn", "merge", "dec_embed", "decoder", "out"):
            self.add_child(name, getattr(self, name))

    def encode(self, batch: SequenceBatch) -> Context:
        if batch.scene is None:
            raise ShapeMismatch("visual model needs a scene image per example")
        v = encode_context(self, batch.x)  # type: ignore[arg-type]
        visual = self.cnn(batch.scene)
        return {
            "v": v,
            "summary": self.merge(concat([v, visual], axis=-1)),
            "last": batch.x[:, -1, :],
        }

    def decode_steps(
        self,
        context: Context,
        z: Tensor,
        t_fut: int,
        targets: Optional[Tensor] = None,
    ) -> Iterator[Tensor]:
        summary, previous = context["summary"], context["last"]
        self.check_latent(z, summary.shape[0])
        state = self.decoder.initial_state(summary.shape[0])
        for t in range(t_fut):
            step_input = self.dec_embed(concat([previous, summary, z], axis=-1))
            state = self.decoder(step_input, state)
            output = self.out(state[0])
            yield output.reshape((output.shape[0], 1, 2))
            previous = targets[:, t, :] if targets is not None else output


def visual_forward(
    m: VisualTrajectoryModel, x: Tensor, scene: Tensor, z: Tensor, t_fut: int
) -> Tensor:
    """
    Decode one future per latent for observed ``x`` and its ``scene``.

    Unbatched ``x`` (T_obs, 2), ``scene`` (1, S, S) and ``z`` (L,) give (T_fut, 2).

    Raises:
        ShapeMismatch: If the scene extents are not divisible by 16
    """
    single = x.ndim == 2
    if single:
        x, scene, z = (t.reshape((1,) + t.shape) for t in (x, scene, z))
    out = m.predict(SequenceBatch(x=x, scene=scene), z, t_fut=t_fut)
    return out.reshape((t_fut, 2)) if single else out
