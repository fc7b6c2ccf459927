"""
Evaluation metrics: NCLL, oracle top-k error, KL curves, k-means clustering
of samples, thresholded forecast scores and sample statistics.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from .data.dataset import to_absolute
from .error_handling import validate_positive, validate_same_shape
from .exceptions import InvalidK, MissingY, TooFewSamples
from .models.base import ConditionalModel
from .models.batch import SequenceBatch
from .objectives.likelihood import decoder_loglik
from .tensor import RngStream, logsumexp
from .validation import EvalConfig, LikelihoodConfig

logger = logging.getLogger(__name__)


def ncll_per_example(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
) -> np.ndarray:
    """
    ``-(logsumexp_i log p(y | z_i, x) - log T)`` per example with prior draws
    ``z_i``; the Gaussian normalizer is always included.
    """
    if t < 1:
        raise ValueError(f"T must be >= 1, got {t}")
    if batch.y is None:
        raise MissingY("NCLL needs the future sequence y")
    cfg = LikelihoodConfig(
        sigma_dec=(likelihood or LikelihoodConfig()).sigma_dec, include_normalizer=True
    )
    z = model.draw_latents(batch.size, t, rng)
    y_hat = model.predict(batch, z, reps=t)
    stacked = y_hat.reshape((t, batch.size) + y_hat.shape[1:])
    ll = decoder_loglik(stacked, batch.y, cfg, batch_axes=2)
    return -(logsumexp(ll, axis=0).data - math.log(t))


def ncll(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
) -> float:
    """Batch-mean negative conditional log-likelihood (lower is better)."""
    return float(np.mean(ncll_per_example(model, batch, t, rng, likelihood)))


def oracle_topk_error(
    samples: np.ndarray,
    y: np.ndarray,
    cfg: Optional[EvalConfig] = None,
    origin: Optional[np.ndarray] = None,
    k: Optional[int] = None,
) -> Dict[int, float]:
    """
    Mean euclidean error per horizon of the samples closest to ``y``.

    ``samples`` is (T, T_fut, 2) and ``y`` (T_fut, 2), both relative
    displacements; distances are taken between absolute positions. Samples
    are ranked by the norm of their whole-sequence difference and the best
    ``ceil(topk_frac * T)`` (or ``k``) are averaged.

    Raises:
        TooFewSamples: If fewer than ``ceil(1 / topk_frac)`` samples are given
    """
    cfg = cfg or EvalConfig()
    samples = np.asarray(samples, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    count = samples.shape[0]
    needed = math.ceil(1.0 / cfg.topk_frac - 1e-9)
    if count < needed:
        raise TooFewSamples(
            f"oracle top-{cfg.topk_frac:.0%} needs at least {needed} samples, "
            f"got {count}",
            {"needed": needed, "got": count},
        )
    horizons = cfg.horizons_within(y.shape[0])
    predicted = to_absolute(samples, origin)
    truth = to_absolute(y, origin)
    offsets = predicted - truth[None]
    per_step = np.linalg.norm(offsets, axis=-1)
    whole = np.linalg.norm(offsets.reshape(count, -1), axis=-1)
    ranking = np.argsort(whole, kind="stable")
    keep = k if k is not None else math.ceil(cfg.topk_frac * count - 1e-9)
    best = per_step[ranking[:keep]]
    return {h: float(best[:, h - 1].mean()) for h in horizons}


def kl_curve(log: pd.DataFrame | str) -> pd.DataFrame:
    """(step, kl) series of a training metrics log (a frame or a CSV path)."""
    frame = pd.read_csv(log) if isinstance(log, str) else log
    return frame.loc[:, ["step", "kl"]].reset_index(drop=True)


def smooth_curve(curve: pd.DataFrame, window: int = 100) -> pd.DataFrame:
    """Trailing moving average of the ``kl`` column."""
    validate_positive("window", window)
    smoothed = curve.copy()
    smoothed["kl"] = curve["kl"].rolling(window, min_periods=1).mean()
    return smoothed


def final_window_mean(curve: pd.DataFrame, window: int = 1000) -> float:
    """Mean KL over the last ``window`` logged steps."""
    validate_positive("window", window)
    return float(curve["kl"].tail(window).mean())


class KMeansResult(BaseModel):
    """Cluster assignment, centroids and the inertia after every assignment."""

    labels: np.ndarray
    centroids: np.ndarray
    inertia_history: List[float] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]


def kmeans(
    points: np.ndarray, k: int, iters: int = 50, seed: int = 0, tol: float = 1e-9
) -> KMeansResult:
    """
    Lloyd's algorithm on (n, d) points, initialized with ``k`` distinct data
    points chosen by ``seed``. Stops after ``iters`` iterations or when no
    centroid moves more than ``tol``. An emptied cluster keeps its centroid.

    Raises:
        InvalidK: If k < 1 or k > n
    """
    points = np.asarray(points, dtype=np.float64).reshape(len(points), -1)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise InvalidK(f"k must lie in [1, {n}], got {k}", {"k": k, "n": n})
    centroids = points[RngStream(seed).permutation(n)[:k]].copy()
    history: List[float] = []
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(iters):
        distances = ((points[:, None, :] - centroids[None]) ** 2).sum(axis=-1)
        labels = np.argmin(distances, axis=1)
        history.append(float(distances[np.arange(n), labels].sum()))
        updated = centroids.copy()
        for cluster in range(k):
            members = points[labels == cluster]
            if len(members):
                updated[cluster] = members.mean(axis=0)
        shift = float(np.max(np.abs(updated - centroids)))
        centroids = updated
        if shift <= tol:
            break
    distances = ((points[:, None, :] - centroids[None]) ** 2).sum(axis=-1)
    labels = np.argmin(distances, axis=1)
    history.append(float(distances[np.arange(n), labels].sum()))
    return KMeansResult(labels=labels, centroids=centroids, inertia_history=history)


class ForecastScores(BaseModel):
    """
    Thresholded verification scores. A score whose denominator is zero is
    ``None`` and its name is listed in ``undefined``.
    """

    csi: Optional[float]
    far: Optional[float]
    pod: Optional[float]
    correlation: Optional[float]
    hits: int
    misses: int
    false_alarms: int
    undefined: List[str] = Field(default_factory=list)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    return numerator / denominator if denominator > 0 else None


def forecast_metrics(
    pred: np.ndarray, true: np.ndarray, threshold: float = 0.5
) -> ForecastScores:
    """
    CSI, FAR, POD over pixels binarized at ``threshold`` (value >= threshold
    is an event) and Pearson correlation of the raw values.
    """
    pred = np.asarray(pred, dtype=np.float64)
    true = np.asarray(true, dtype=np.float64)
    validate_same_shape("forecast_metrics", pred, true)
    forecast, observed = pred >= threshold, true >= threshold
    hits = int(np.sum(forecast & observed))
    misses = int(np.sum(~forecast & observed))
    false_alarms = int(np.sum(forecast & ~observed))

    correlation = None
    centred_p, centred_t = pred - pred.mean(), true - true.mean()
    norm = math.sqrt(float(np.sum(centred_p**2)) * float(np.sum(centred_t**2)))
    if norm > 0:
        correlation = float(np.sum(centred_p * centred_t)) / norm

    scores = {
        "csi": _ratio(hits, hits + misses + false_alarms),
        "far": _ratio(false_alarms, hits + false_alarms),
        "pod": _ratio(hits, hits + misses),
        "correlation": correlation,
    }
    return ForecastScores(
        **scores,
        hits=hits,
        misses=misses,
        false_alarms=false_alarms,
        undefined=[name for name, value in scores.items() if value is None],
    )


class FrameStatistics(BaseModel):
    """Best sample, per-pixel mean and per-pixel variance of sampled frames."""

    best: np.ndarray
    best_index: int
    mean: np.ndarray
    variance: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True)


def sample_statistics(
    samples: Sequence[np.ndarray] | np.ndarray, truth: np.ndarray
) -> FrameStatistics:
    """
    Summarize (T, ...) samples: the one closest to ``truth`` in euclidean
    distance, plus the per-pixel mean and (population) variance.

    Raises:
        TooFewSamples: If fewer than 2 samples are given
    """
    stacked = np.asarray(samples, dtype=np.float64)
    if stacked.shape[0] < 2:
        raise TooFewSamples(
            f"sample statistics need >= 2 samples, got {stacked.shape[0]}"
        )
    gaps = (stacked - np.asarray(truth)[None]).reshape(len(stacked), -1)
    distances = np.sqrt((gaps**2).sum(axis=1))
    best = int(np.argmin(distances))
    return FrameStatistics(
        best=stacked[best],
        best_index=best,
        mean=stacked.mean(axis=0),
        variance=stacked.var(axis=0),
    )
