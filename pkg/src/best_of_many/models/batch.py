from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from ..exceptions import ShapeMismatch
from ..tensor import Tensor

BatchKind = Literal["trajectory", "image"]


@dataclass(frozen=True)
class SequenceBatch:
    """
    Paired observed/future sequences.

    Trajectories are (B, T, 2) relative displacements; image sequences are
    (B, T, H, W) single-channel frames. ``scene`` holds (B, 1, S, S) map
    images for visually conditioned models. ``y`` may be absent when only
    sampling is requested.
    """

    x: Tensor
    y: Optional[Tensor] = None
    kind: BatchKind = "trajectory"
    scene: Optional[Tensor] = None

    def __post_init__(self) -> None:
        expected = 3 if self.kind == "trajectory" else 4
        tensors = [("x", self.x)] + ([("y", self.y)] if self.y is not None else [])
        for name, tensor in tensors:
            if tensor.ndim != expected or tensor.shape[1] < 1:
                raise ShapeMismatch(
                    f"{name}: {self.kind} batch needs {expected} axes with T >= 1, "
                    f"got {tensor.shape}"
                )
            if self.kind == "trajectory" and tensor.shape[-1] != 2:
                raise ShapeMismatch(
                    f"{name}: trajectories have 2 channels, got {tensor.shape}"
                )
            if tensor.shape[0] != self.x.shape[0]:
                raise ShapeMismatch(
                    f"{name}: batch size {tensor.shape[0]} != {self.x.shape[0]}"
                )
        image = self.kind == "image"
        if self.y is not None and image and self.y.shape[2:] != self.x.shape[2:]:
            raise ShapeMismatch(f"frame sizes differ: {self.x.shape} vs {self.y.shape}")
        if self.scene is not None and (
            self.scene.ndim != 4 or self.scene.shape[0] != self.x.shape[0]
        ):
            raise ShapeMismatch(f"scene: expected (B, 1, S, S), got {self.scene.shape}")

    @classmethod
    def from_arrays(
        cls,
        x: np.ndarray,
        y: Optional[np.ndarray] = None,
        kind: BatchKind = "trajectory",
        scene: Optional[np.ndarray] = None,
    ) -> "SequenceBatch":
        return cls(
            x=Tensor(x),
            y=None if y is None else Tensor(y),
            kind=kind,
            scene=None if scene is None else Tensor(scene),
        )

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def t_obs(self) -> int:
        return self.x.shape[1]

    @property
    def t_fut(self) -> Optional[int]:
        return None if self.y is None else self.y.shape[1]

    def take(self, indices: Sequence[int]) -> "SequenceBatch":
        """Sub-batch of the given example indices."""
        index = np.asarray(indices, dtype=np.int64)
        return SequenceBatch.from_arrays(
            self.x.data[index],
            None if self.y is None else self.y.data[index],
            self.kind,
            None if self.scene is None else self.scene.data[index],
        )
