"""Conv-LSTM encoder-decoder for image sequences with spatial latents."""

from typing import Iterator, Optional

from ..constants import Activation, ModelKind
from ..exceptions import ShapeMismatch
from ..latent import RecognitionNetImage
from ..nn import Conv2d, ConvLstmCell, maxpool2, upsample2
from ..tensor import RngStream, Tensor, concat
from ..validation import ModelProfileConfig
from .base import ConditionalModel, Context
from .batch import SequenceBatch


class ImageSeqModel(ConditionalModel):
    """
    Encoder: conv embedding, pool, Conv-LSTM, pool, Conv-LSTM, giving a
    summary ``v`` on the H/4 x W/4 grid. Decoder step: conv embedding of
    concat(v, z), Conv-LSTM, upsample, Conv-LSTM, upsample, conv, linear
    1-channel conv. The latent ``z`` lives on the same H/4 x W/4 grid, so
    each of its cells conditions a local neighbourhood of the frame.
    """

    kind = ModelKind.IMAGE_SEQUENCE
    batch_kind = "image"

    def __init__(
        self,
        sizes: ModelProfileConfig,
        rng: RngStream,
        grid: int = 16,
        latent_channels: Optional[int] = None,
        with_recognition: bool = True,
    ) -> None:
        if grid % 4:
            raise ShapeMismatch(f"image extent must be divisible by 4, got {grid}")
        channels = sizes.latent_channels if latent_channels is None else latent_channels
        recognizer = None
        if with_recognition and channels > 0:
            recognizer = RecognitionNetImage(
                sizes.conv_embed, sizes.conv_hidden, channels, rng.substream(10)
            )
        super().__init__((channels, grid // 4, grid // 4), recognizer)
        self.grid = grid
        enc0, enc1 = sizes.conv_hidden
        dec0, dec1 = sizes.dec_conv_hidden
        relu = Activation.RELU
        self.enc_embed = Conv2d(1, sizes.conv_embed, rng.substream(0), activation=relu)
        self.enc_lstm1 = ConvLstmCell(sizes.conv_embed, enc0, rng.substream(1))
        self.enc_lstm2 = ConvLstmCell(enc0, enc1, rng.substream(2))
        self.dec_embed = Conv2d(
            enc1 + channels, sizes.dec_conv_embed, rng.substream(3), activation=relu
        )
        self.dec_lstm1 = ConvLstmCell(sizes.dec_conv_embed, dec0, rng.substream(4))
        self.dec_lstm2 = ConvLstmCell(dec0, dec1, rng.substream(5))
        self.out_conv = Conv2d(dec1, sizes.out_conv, rng.substream(6), activation=relu)
        self.head = Conv2d(sizes.out_conv, 1, rng.substream(7))
        for name in (
            "enc_embed",
            "enc_lstm1",
            "enc_lstm2",
            "dec_embed",
            "dec_lstm1",
            "dec_lstm2",
            "out_conv",
            "head",
        ):
            self.add_child(name, getattr(self, name))

    def encode(self, batch: SequenceBatch) -> Context:
        x = batch.x
        if x.ndim != 4 or x.shape[2:] != (self.grid, self.grid):
            raise ShapeMismatch(
                f"image encoder: expected (B, T, {self.grid}, {self.grid}), "
                f"got {x.shape}"
            )
        size = x.shape[0]
        state1 = self.enc_lstm1.initial_state(size, self.grid // 2, self.grid // 2)
        state2 = self.enc_lstm2.initial_state(size, self.grid // 4, self.grid // 4)
        for t in range(x.shape[1]):
            frame = x[:, t : t + 1, :, :]
            state1 = self.enc_lstm1(maxpool2(self.enc_embed(frame)), state1)
            state2 = self.enc_lstm2(maxpool2(state1[0]), state2)
        return {"v": state2[0]}

    def decode_steps(
        self,
        context: Context,
        z: Tensor,
        t_fut: int,
        targets: Optional[Tensor] = None,
    ) -> Iterator[Tensor]:
        # Frames are not fed back; recurrence lives in the Conv-LSTM states.
        v = context["v"]
        rows = v.shape[0]
        self.check_latent(z, rows)
        quarter, half = self.grid // 4, self.grid // 2
        state1 = self.dec_lstm1.initial_state(rows, quarter, quarter)
        state2 = self.dec_lstm2.initial_state(rows, half, half)
        step_input = self.dec_embed(concat([v, z], axis=1))
        for _ in range(t_fut):
            state1 = self.dec_lstm1(step_input, state1)
            state2 = self.dec_lstm2(upsample2(state1[0]), state2)
            frame = self.head(self.out_conv(upsample2(state2[0])))
            yield frame


def image_seq_forward(
    m: ImageSeqModel, x: Tensor, z_spatial: Tensor, t_fut: int
) -> Tensor:
    """
    Predict ``t_fut`` frames from observed frames and a spatial latent.

    Unbatched ``x`` (T_obs, H, W) with ``z_spatial`` (C, H/4, W/4) gives
    (T_fut, H, W); batched inputs give (B, T_fut, H, W).

    Raises:
        ShapeMismatch: If ``z_spatial`` does not match the bottleneck grid
    """
    single = x.ndim == 3
    if single:
        x = x.reshape((1,) + x.shape)
        z_spatial = z_spatial.reshape((1,) + z_spatial.shape)
    out = m.predict(SequenceBatch(x=x, kind="image"), z_spatial, t_fut=t_fut)
    return out.reshape(out.shape[1:]) if single else out
