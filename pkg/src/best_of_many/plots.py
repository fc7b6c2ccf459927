"""
SVG figures: clustered sample fans, KL and oracle-error overlays, and
best/mean/variance frame triplets. Every figure is byte-identical across reruns.
"""

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .data.dataset import to_absolute  # noqa: E402
from .exceptions import IoError  # noqa: E402
from .metrics import FrameStatistics, smooth_curve  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "best-of-many"
plt.rcParams["svg.fonttype"] = "path"

OBSERVED_COLOR = "0.85"
TRUTH_COLOR = "black"
CLUSTER_CMAP = "tab10"


def save_svg(fig: Figure, path: str | Path) -> Path:
    """Write ``fig`` as SVG without a creation date and close it."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(target, format="svg", metadata={"Date": None})
    except OSError as e:
        raise IoError(f"Cannot write figure {target}: {e}", {"path": str(target)})
    finally:
        plt.close(fig)
    logger.debug(f"Wrote {target}")
    return target


def plot_samples(
    obs: np.ndarray,
    samples: np.ndarray,
    truth: Optional[np.ndarray],
    labels: np.ndarray,
    path: str | Path,
    title: str = "",
) -> Path:
    """
    Observed track, sampled futures colored by cluster, and the ground truth.

    All inputs are relative displacements: ``obs`` (T_obs, 2), ``samples``
    (T, T_fut, 2), ``truth`` (T_fut, 2) and ``labels`` (T,).
    """
    observed = to_absolute(obs)
    origin = observed[-1]
    futures = to_absolute(samples, origin)
    cmap = plt.get_cmap(CLUSTER_CMAP)

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.set_facecolor("0.2")
    start = np.zeros((1, 2))
    track = np.concatenate([start, observed])
    ax.plot(
        track[:, 0], track[:, 1], color=OBSERVED_COLOR, linewidth=3, label="observed"
    )
    for future, label in zip(futures, labels):
        path_xy = np.concatenate([origin[None], future])
        color = cmap(int(label) % cmap.N)
        ax.plot(path_xy[:, 0], path_xy[:, 1], color=color, alpha=0.6, linewidth=1)
    if truth is not None:
        true_xy = np.concatenate([origin[None], to_absolute(truth, origin)])
        ax.plot(
            true_xy[:, 0],
            true_xy[:, 1],
            color=TRUTH_COLOR,
            linewidth=2,
            linestyle="--",
            label="ground truth",
        )
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize="small")
    return save_svg(fig, path)


def plot_kl_overlay(
    curves: Mapping[str, pd.DataFrame], path: str | Path, window: int = 100
) -> Path:
    """Smoothed KL-versus-step curve per run label."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, curve in curves.items():
        smoothed = smooth_curve(curve, window)
        ax.plot(smoothed["step"], smoothed["kl"], label=label)
    ax.set_xlabel("step")
    ax.set_ylabel("KL(q || p)")
    ax.set_title("Recognition KL during training")
    if curves:
        ax.legend()
    return save_svg(fig, path)


def plot_oracle_overlay(frame: pd.DataFrame, path: str | Path) -> Path:
    """
    Oracle top-k error against horizon, one line per method.

    ``frame`` has a ``method`` column and one ``oracle_h<step>`` column per
    horizon.
    """
    columns = [c for c in frame.columns if c.startswith("oracle_h")]
    horizons = [int(c[len("oracle_h") :]) for c in columns]
    fig, ax = plt.subplots(figsize=(6, 4))
    for _, row in frame.iterrows():
        errors = [row[c] for c in columns]
        ax.plot(horizons, errors, marker="o", label=str(row["method"]))
    ax.set_xlabel("horizon (steps)")
    ax.set_ylabel("oracle top-k error")
    ax.set_xticks(horizons)
    ax.legend()
    return save_svg(fig, path)


def plot_frame_statistics(
    truth: np.ndarray,
    stats: FrameStatistics,
    path: str | Path,
    steps: Optional[Sequence[int]] = None,
) -> Path:
    """
    Rows of ground truth, best sample, mean and variance for the future frames
    (T_fut, H, W) at ``steps`` (default: every third frame).
    """
    t_fut = truth.shape[0]
    columns = list(steps) if steps is not None else list(range(0, t_fut, 3))
    rows = [
        ("ground truth", truth),
        ("best", stats.best),
        ("mean", stats.mean),
        ("variance", stats.variance),
    ]
    fig, axes = plt.subplots(
        len(rows),
        len(columns),
        figsize=(1.2 * len(columns), 1.3 * len(rows)),
        squeeze=False,
    )
    variance_max = float(stats.variance.max()) or 1.0
    for r, (name, frames) in enumerate(rows):
        vmax = variance_max if name == "variance" else 1.0
        for c, step in enumerate(columns):
            ax = axes[r][c]
            ax.imshow(
                frames[step], cmap="gray", vmin=0.0, vmax=vmax, interpolation="nearest"
            )
            ax.set_xticks([])
            ax.set_yticks([])
            if r == 0:
                ax.set_title(f"t+{step + 1}", fontsize="small")
            if c == 0:
                ax.set_ylabel(name, fontsize="small")
    return save_svg(fig, path)
