from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..error_handling import validate_fraction
from ..models.batch import SequenceBatch
from ..tensor import RngStream


def to_absolute(
    displacements: np.ndarray, origin: Optional[np.ndarray] = None
) -> np.ndarray:
    """Positions after each displacement step, starting from ``origin`` (default 0)."""
    positions = np.cumsum(displacements, axis=-2)
    if origin is not None:
        positions = positions + np.expand_dims(np.asarray(origin), -2)
    return positions


def to_relative(
    positions: np.ndarray, origin: Optional[np.ndarray] = None
) -> np.ndarray:
    """Inverse of :func:`to_absolute`."""
    start = np.zeros_like(positions[..., :1, :])
    if origin is not None:
        start = start + np.expand_dims(np.asarray(origin), -2)
    return np.diff(np.concatenate([start, positions], axis=-2), axis=-2)


@dataclass(eq=False)
class TrajectoryDataset:
    """
    Observed and future relative displacements, (N, T_obs, 2) and (N, T_fut, 2).

    ``meta`` holds per-example metadata (the generating mode for synthetic
    tasks); models never see it. ``scenes`` holds (N, S, S) map images.
    """

    obs: np.ndarray
    fut: np.ndarray
    meta: List[Dict[str, Any]] = field(default_factory=list)
    scenes: Optional[np.ndarray] = None

    kind = "trajectory"

    def __len__(self) -> int:
        return int(self.obs.shape[0])

    @property
    def t_obs(self) -> int:
        return int(self.obs.shape[1])

    @property
    def t_fut(self) -> int:
        return int(self.fut.shape[1])

    def last_observed(self) -> np.ndarray:
        """Absolute position of the last observed step for every example."""
        return self.obs.sum(axis=1)

    def absolute_future(self) -> np.ndarray:
        return to_absolute(self.fut, self.last_observed())

    def subset(self, indices: Sequence[int]) -> "TrajectoryDataset":
        index = np.asarray(indices, dtype=np.int64)
        return TrajectoryDataset(
            obs=self.obs[index],
            fut=self.fut[index],
            meta=[self.meta[i] for i in index] if self.meta else [],
            scenes=None if self.scenes is None else self.scenes[index],
        )

    def batch(self, indices: Sequence[int]) -> SequenceBatch:
        index = np.asarray(indices, dtype=np.int64)
        scene = None if self.scenes is None else self.scenes[index][:, None]
        return SequenceBatch.from_arrays(
            self.obs[index], self.fut[index], "trajectory", scene
        )

    def equals(self, other: "TrajectoryDataset") -> bool:
        scenes_equal = (self.scenes is None and other.scenes is None) or (
            self.scenes is not None
            and other.scenes is not None
            and np.array_equal(self.scenes, other.scenes)
        )
        return (
            np.array_equal(self.obs, other.obs)
            and np.array_equal(self.fut, other.fut)
            and self.meta == other.meta
            and scenes_equal
        )


@dataclass(eq=False)
class ImageSequenceDataset:
    """Frame sequences (N, T_obs + T_fut, H, W) with values in [0, 1]."""

    frames: np.ndarray
    t_obs: int
    meta: List[Dict[str, Any]] = field(default_factory=list)

    kind = "image"

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def obs(self) -> np.ndarray:
        return self.frames[:, : self.t_obs]

    @property
    def fut(self) -> np.ndarray:
        return self.frames[:, self.t_obs :]

    @property
    def t_fut(self) -> int:
        return int(self.frames.shape[1]) - self.t_obs

    def subset(self, indices: Sequence[int]) -> "ImageSequenceDataset":
        index = np.asarray(indices, dtype=np.int64)
        return ImageSequenceDataset(
            frames=self.frames[index],
            t_obs=self.t_obs,
            meta=[self.meta[i] for i in index] if self.meta else [],
        )

    def batch(self, indices: Sequence[int]) -> SequenceBatch:
        index = np.asarray(indices, dtype=np.int64)
        return SequenceBatch.from_arrays(self.obs[index], self.fut[index], "image")

    def equals(self, other: "ImageSequenceDataset") -> bool:
        return (
            self.t_obs == other.t_obs
            and np.array_equal(self.frames, other.frames)
            and self.meta == other.meta
        )


Dataset = TrajectoryDataset | ImageSequenceDataset


def split(dataset: Dataset, frac: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Shuffle deterministically and split into (first ``frac``, rest).

    Raises:
        InvalidFraction: If frac is not strictly between 0 and 1
    """
    validate_fraction(frac)
    order = RngStream(seed, stream_id=7).permutation(len(dataset))
    cut = int(round(frac * len(dataset)))
    return dataset.subset(order[:cut]), dataset.subset(order[cut:])
