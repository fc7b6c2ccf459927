import math
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from ..exceptions import InvalidSpec


class ForkSpec(BaseModel):
    """
    Synthetic branching-trajectory task.

    The observed part moves along +x; the future turns into one of
    ``n_modes`` directions laid out symmetrically about +x, neighbours
    ``2 * branch_angle`` apart. The spacing is capped at ``2 pi / M`` so no
    two modes share a direction; two modes give the +/-branch_angle fork.
    """

    t_obs: int = Field(default=8, description="Observed steps")
    t_fut: int = Field(default=12, description="Future steps")
    speed: float = Field(default=1.0, description="Displacement length per step")
    branch_angle: float = Field(
        default=math.pi / 4, description="Angle between modes (rad)"
    )
    noise_std: float = Field(default=0.05, description="Per-step displacement noise")
    n_modes: int = Field(default=2, description="Number of future directions")
    mode_probs: Optional[List[float]] = Field(
        default=None, description="Mode probabilities (uniform when omitted)"
    )
    map_size: int = Field(default=64, description="Scene image extent for fork_map")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_spec(self) -> "ForkSpec":
        if self.t_obs < 1 or self.t_fut < 1:
            raise InvalidSpec(
                f"t_obs and t_fut must be >= 1, got {self.t_obs}/{self.t_fut}"
            )
        if self.n_modes < 1:
            raise InvalidSpec(f"n_modes must be >= 1, got {self.n_modes}")
        if not 0 < self.branch_angle <= math.pi / 2:
            raise InvalidSpec(
                f"branch_angle must lie in (0, pi/2], got {self.branch_angle}"
            )
        if not self.noise_std > 0:
            raise InvalidSpec(f"noise_std must be > 0, got {self.noise_std}")
        if self.map_size % 16:
            raise InvalidSpec(f"map_size must be divisible by 16, got {self.map_size}")
        if self.mode_probs is not None:
            probs = self.mode_probs
            if len(probs) != self.n_modes:
                raise InvalidSpec(
                    f"mode_probs has {len(probs)} entries for {self.n_modes} modes",
                    {"mode_probs": probs},
                )
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
                raise InvalidSpec(
                    "mode_probs must be non-negative and sum to 1",
                    {"mode_probs": probs},
                )
        return self

    @property
    def probs(self) -> List[float]:
        return self.mode_probs or [1.0 / self.n_modes] * self.n_modes

    @property
    def mode_spacing(self) -> float:
        return min(2.0 * self.branch_angle, 2.0 * math.pi / self.n_modes)

    def mode_angle(self, mode: int) -> float:
        return self.mode_spacing * ((self.n_modes - 1) / 2 - mode)


class BlobSpec(BaseModel):
    """
    Synthetic moving-blob image sequences.

    The blob drifts in one of ``n_directions`` directions while observed and
    reaches the grid centre at the last observed frame; the future turns into
    a uniformly chosen direction.
    """

    grid: int = Field(default=16, description="Frame extent in pixels")
    t_obs: int = Field(default=5, description="Observed frames")
    t_fut: int = Field(default=15, description="Future frames")
    blob_sigma: float = Field(default=1.2, description="Gaussian blob width in pixels")
    speed: float = Field(default=0.3, description="Pixels moved per frame")
    n_directions: int = Field(default=4, description="Number of future directions")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_spec(self) -> "BlobSpec":
        if self.grid < 4 or self.grid % 4:
            raise InvalidSpec(f"grid must be a positive multiple of 4, got {self.grid}")
        if self.t_obs < 1 or self.t_fut < 1:
            raise InvalidSpec(
                f"t_obs and t_fut must be >= 1, got {self.t_obs}/{self.t_fut}"
            )
        if not self.blob_sigma > 0:
            raise InvalidSpec(f"blob_sigma must be > 0, got {self.blob_sigma}")
        if self.n_directions < 1:
            raise InvalidSpec(f"n_directions must be >= 1, got {self.n_directions}")
        return self

    def direction(self, index: int) -> float:
        return 2.0 * math.pi * index / self.n_directions
