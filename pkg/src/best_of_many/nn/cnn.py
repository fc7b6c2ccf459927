from typing import List, Sequence, Tuple

from best_of_many.constants import Activation
from best_of_many.exceptions import ShapeMismatch
from best_of_many.tensor import RngStream, Tensor

from .base import Module
from .layers import Conv2d, Linear, flatten, maxpool2, maybe_batch

POOLS = 4


class CnnEncoder(Module):
    """
    Visual encoder: four (3x3 conv, tanh, 2x2 max pool) blocks followed by
    two tanh dense layers. The published sizes are filters (32, 64, 128, 256),
    hidden 1024 and output 32.
    """

    def __init__(
        self,
        in_channels: int,
        image_size: Tuple[int, int],
        rng: RngStream,
        filters: Sequence[int] = (32, 64, 128, 256),
        hidden: int = 1024,
        out_features: int = 32,
    ) -> None:
        super().__init__()
        if len(filters) != POOLS:
            raise ValueError(
                f"CnnEncoder needs {POOLS} filter sizes, got {len(filters)}"
            )
        _check_divisible(image_size)
        self.in_channels = in_channels
        self.image_size = tuple(image_size)
        self.out_features = out_features

        self.convs: List[Conv2d] = []
        channels = in_channels
        for index, width in enumerate(filters):
            conv = Conv2d(
                channels, width, rng.substream(index), activation=Activation.TANH
            )
            self.convs.append(conv)
            self.add_child(f"conv{index + 1}", conv)
            channels = width

        cells = (image_size[0] // 2**POOLS) * (image_size[1] // 2**POOLS)
        self.fc1 = Linear(
            channels * cells, hidden, rng.substream(POOLS), Activation.TANH
        )
        self.fc2 = Linear(
            hidden, out_features, rng.substream(POOLS + 1), Activation.TANH
        )
        self.add_child("fc1", self.fc1)
        self.add_child("fc2", self.fc2)

    def __call__(self, image: Tensor) -> Tensor:
        return cnn_encode(self, image)


def _check_divisible(size: Sequence[int]) -> None:
    if any(extent % 2**POOLS for extent in size):
        raise ShapeMismatch(
            f"cnn_encode: image extents must be divisible by {2**POOLS}, "
            f"got {tuple(size)}",
            {"shape": list(size)},
        )


def cnn_encode(p: CnnEncoder, image: Tensor) -> Tensor:
    """
    Summarize a (C, H, W) image, or a (B, C, H, W) batch, into values in (-1, 1).

    Raises:
        ShapeMismatch: If the extents are not divisible by 16 or differ from
            the size the encoder was built for
    """
    _check_divisible(image.shape[-2:])
    if image.shape[-3:] != (p.in_channels,) + p.image_size:
        raise ShapeMismatch(
            f"cnn_encode: expected image {(p.in_channels,) + p.image_size}, "
            f"got {image.shape[-3:]}"
        )
    x, single = maybe_batch(image, 4)
    for conv in p.convs:
        x = maxpool2(conv(x))
    summary = p.fc2(p.fc1(flatten(x)))
    return summary.reshape((p.out_features,)) if single else summary
