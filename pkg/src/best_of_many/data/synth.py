"""
Synthetic multimodal datasets with known structure.

Every generator is a pure function of (spec, n, seed): modes, noise and
scene choices come from fixed substreams of ``RngStream(seed)``.
"""

import logging
import math
from typing import Dict, Optional

import numpy as np

from ..exceptions import InvalidSpec
from ..tensor import RngStream
from ..validation import BlobSpec, ForkSpec
from .dataset import ImageSequenceDataset, TrajectoryDataset

logger = logging.getLogger(__name__)

# Corridor half-width in pixels.
CORRIDOR_HALF_WIDTH = 3.0

_MODES, _OBS_NOISE, _FUT_NOISE = 0, 1, 2


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidSpec(f"n must be >= 1, got {n}")


def mode_directions(spec: ForkSpec) -> np.ndarray:
    """Per-step displacement of every mode, (M, 2)."""
    angles = np.array([spec.mode_angle(m) for m in range(spec.n_modes)])
    return spec.speed * np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def mode_means(spec: ForkSpec) -> np.ndarray:
    """Noiseless future displacements of every mode, (M, T_fut, 2)."""
    return np.repeat(mode_directions(spec)[:, None, :], spec.t_fut, axis=1)


def _branching(spec: ForkSpec, n: int, seed: int) -> TrajectoryDataset:
    _check_n(n)
    rng = RngStream(seed)
    modes = rng.substream(_MODES).choice(spec.probs, n)
    obs = rng.substream(_OBS_NOISE).normal((n, spec.t_obs, 2), std=spec.noise_std)
    obs[..., 0] += spec.speed
    fut = rng.substream(_FUT_NOISE).normal((n, spec.t_fut, 2), std=spec.noise_std)
    fut += mode_directions(spec)[modes][:, None, :]
    meta = [{"mode": int(mode)} for mode in modes]
    return TrajectoryDataset(obs=obs, fut=fut, meta=meta)


def gen_fork(spec: ForkSpec, n: int, seed: int) -> TrajectoryDataset:
    """
    Straight +x motion while observed, then a branch into one of the modes.

    Raises:
        InvalidSpec: If n < 1
    """
    return _branching(spec, n, seed)


def gen_star(spec: ForkSpec, n: int, seed: int) -> TrajectoryDataset:
    """
    Futures branching into ``spec.n_modes`` equally spaced directions.

    With one mode this is the single-branch fork.
    """
    return _branching(spec, n, seed)


def fork_analytic_ncll(
    spec: ForkSpec, fut: np.ndarray, mode: Optional[int | np.ndarray] = None
) -> float | np.ndarray:
    """
    Exact ``-log sum_m pi_m N(fut; mu_m, noise_std^2 I)`` of future displacements.

    ``fut`` is (T_fut, 2) or (N, T_fut, 2). Passing the true ``mode`` gives
    the floor of a model that knows the branch (single Gaussian).
    """
    fut = np.asarray(fut, dtype=np.float64)
    single = fut.ndim == 2
    futures = fut[None] if single else fut
    means = mode_means(spec)
    variance = spec.noise_std**2
    dims = 2 * spec.t_fut
    sq = ((futures[:, None] - means[None]) ** 2).sum(axis=(-2, -1))
    normalizer = -0.5 * dims * math.log(2.0 * math.pi * variance)
    log_density = normalizer - sq / (2.0 * variance)
    if mode is not None:
        picked = np.broadcast_to(np.asarray(mode), (futures.shape[0],))
        result = -log_density[np.arange(futures.shape[0]), picked]
    else:
        with np.errstate(divide="ignore"):
            log_probs = np.log(np.asarray(spec.probs))
        terms = log_density + log_probs[None]
        peak = terms.max(axis=1, keepdims=True)
        result = -(peak[:, 0] + np.log(np.exp(terms - peak).sum(axis=1)))
    return float(result[0]) if single else result


def classify_modes(spec: ForkSpec, fut: np.ndarray) -> np.ndarray:
    """Nearest mode of each future by the direction of its total displacement."""
    fut = np.asarray(fut)
    total = fut.sum(axis=-2)
    angles = np.arctan2(total[..., 1], total[..., 0])
    mode_angles = np.array([spec.mode_angle(m) for m in range(spec.n_modes)])
    gap = np.angle(np.exp(1j * (angles[..., None] - mode_angles)))
    return np.argmin(np.abs(gap), axis=-1)


def _segment_distance(
    px: np.ndarray, py: np.ndarray, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    direction = b - a
    length = float(direction @ direction)
    t = ((px - a[0]) * direction[0] + (py - a[1]) * direction[1]) / length
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - (a[0] + t * direction[0]), py - (a[1] + t * direction[1]))


def render_corridor(spec: ForkSpec, mode: int) -> np.ndarray:
    """
    Binary (S, S) map: the observed approach along +x joined to the branch
    of ``mode`` only. The last observed position sits at the image centre,
    +y points up.
    """
    size = spec.map_size
    scale = (size / 2 - 2) / (spec.speed * max(spec.t_obs, spec.t_fut))
    centres = (np.arange(size) + 0.5 - size / 2) / scale
    px, py = np.meshgrid(centres, -centres)
    origin = np.zeros(2)
    start = np.array([-spec.speed * spec.t_obs, 0.0])
    end = mode_directions(spec)[mode] * spec.t_fut
    distance = np.minimum(
        _segment_distance(px, py, start, origin), _segment_distance(px, py, origin, end)
    )
    return (distance <= CORRIDOR_HALF_WIDTH / scale).astype(np.float64)


def gen_fork_with_map(spec: ForkSpec, n: int, seed: int) -> TrajectoryDataset:
    """
    Fork trajectories with a corridor map that leaves only the taken branch open.
    """
    dataset = _branching(spec, n, seed)
    corridors: Dict[int, np.ndarray] = {}
    scenes = np.empty((n, spec.map_size, spec.map_size))
    for i, record in enumerate(dataset.meta):
        mode = record["mode"]
        if mode not in corridors:
            corridors[mode] = render_corridor(spec, mode)
        scenes[i] = corridors[mode]
    dataset.scenes = scenes
    return dataset


def blob_centres(spec: BlobSpec, obs_direction: int, fut_direction: int) -> np.ndarray:
    """
    Blob centre (row, col) per frame, (T_obs + T_fut, 2).

    The blob reaches the grid centre at the last observed frame.
    """
    centre = spec.grid / 2 - 0.5
    offsets = np.arange(spec.t_obs + spec.t_fut) - (spec.t_obs - 1)
    angles = np.where(
        offsets <= 0, spec.direction(obs_direction), spec.direction(fut_direction)
    )
    rows = centre - offsets * spec.speed * np.sin(angles)
    cols = centre + offsets * spec.speed * np.cos(angles)
    return np.stack([rows, cols], axis=-1)


def gen_blobs(spec: BlobSpec, n: int, seed: int) -> ImageSequenceDataset:
    """
    Gaussian blob moving at constant velocity, turning into a uniformly drawn
    direction after the observed frames. Pixel values lie in [0, 1].

    Raises:
        InvalidSpec: If n < 1
    """
    _check_n(n)
    rng = RngStream(seed)
    uniform = [1.0 / spec.n_directions] * spec.n_directions
    obs_dirs = rng.substream(0).choice(uniform, n)
    fut_dirs = rng.substream(1).choice(uniform, n)
    pixel = np.arange(spec.grid, dtype=np.float64)
    frames = np.empty((n, spec.t_obs + spec.t_fut, spec.grid, spec.grid))
    for i in range(n):
        centres = blob_centres(spec, int(obs_dirs[i]), int(fut_dirs[i]))
        rows = (pixel[None, :] - centres[:, :1]) ** 2
        cols = (pixel[None, :] - centres[:, 1:]) ** 2
        sq = rows[:, :, None] + cols[:, None, :]
        frames[i] = np.exp(-sq / (2 * spec.blob_sigma**2))
    meta = [
        {"direction": int(fut), "obs_direction": int(obs)}
        for obs, fut in zip(obs_dirs, fut_dirs)
    ]
    logger.debug(f"Generated {n} blob sequences on a {spec.grid}x{spec.grid} grid")
    return ImageSequenceDataset(frames=frames, t_obs=spec.t_obs, meta=meta)
