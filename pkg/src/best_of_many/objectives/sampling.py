"""
Sampling objectives over T latent draws per example.

Each objective returns ``(loss, report)``: ``loss`` is the negated batch
mean of the per-example objective value and is recorded on the active tape;
``report`` holds the plain numbers behind it.
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..constants import ObjectiveKind
from ..exceptions import InvalidAlpha, MissingY
from ..latent import kl_per_example
from ..models.base import ConditionalModel
from ..models.batch import SequenceBatch
from ..nn import Module
from ..tensor import RngStream, Tensor, logsumexp, max_, mean
from ..validation import LikelihoodConfig
from .likelihood import decoder_loglik


class ObjectiveReport(BaseModel):
    """
    Numbers behind one objective evaluation on a batch.

    ``per_sample_loglik`` is (B, T); ``per_example_kl`` is (B,) and ``kl`` its
    mean. For the hybrid objective ``prior_loglik`` holds the independent
    prior draws of its Monte-Carlo term.
    """

    objective_kind: ObjectiveKind
    t: int = Field(description="Samples per example")
    value: float = Field(description="Batch mean of the per-example objective")
    kl: float = Field(default=0.0, description="Batch mean KL(q || p)")
    per_example_kl: List[float] = Field(default_factory=list)
    per_sample_loglik: List[List[float]] = Field(default_factory=list)
    prior_loglik: Optional[List[List[float]]] = Field(default=None)
    best_index: Optional[List[int]] = Field(
        default=None, description="Argmax sample per example"
    )
    alpha: Optional[float] = Field(default=None)

    def recompute(self) -> float:
        """Recompute ``value`` from the recorded log-likelihoods and KL terms."""
        ll = Tensor(np.asarray(self.per_sample_loglik), dtype="float64")
        kl = Tensor(
            np.asarray(self.per_example_kl or [0.0] * len(self.per_sample_loglik)),
            dtype="float64",
        )
        kind = self.objective_kind
        if kind is ObjectiveKind.HYBRID:
            prior = Tensor(np.asarray(self.prior_loglik), dtype="float64")
            alpha = self.alpha or 0.0
            values = mc_values(prior) * (1.0 - alpha) + cvae_values(ll, kl) * alpha
        else:
            values = VALUE_FUNCTIONS[kind](ll, kl)
        return float(np.mean(values.data))


# --- per-example formulas on (B, T) log-likelihoods and (B,) KL terms ---


def mc_values(ll: Tensor, kl: Optional[Tensor] = None) -> Tensor:
    """``log(1/T sum_i p_i)``."""
    return logsumexp(ll, axis=-1) - math.log(ll.shape[-1])


def cvae_values(ll: Tensor, kl: Tensor) -> Tensor:
    """``1/T sum_i log p_i - KL``."""
    return mean(ll, axis=-1) - kl


def ms_values(ll: Tensor, kl: Tensor) -> Tensor:
    """``log(1/T sum_i p_i) - KL`` evaluated through logsumexp."""
    return logsumexp(ll, axis=-1) - math.log(ll.shape[-1]) - kl


def bms_values(ll: Tensor, kl: Tensor) -> Tensor:
    """``max_i log p_i - log T - KL``; the gradient reaches only the first argmax."""
    return max_(ll, axis=-1) - math.log(ll.shape[-1]) - kl


def prior_bms_values(ll: Tensor, kl: Optional[Tensor] = None) -> Tensor:
    """``max_i log p_i`` over prior draws, without a KL term."""
    return max_(ll, axis=-1)


def regression_values(ll: Tensor, kl: Optional[Tensor] = None) -> Tensor:
    return ll[..., 0]


VALUE_FUNCTIONS = {
    ObjectiveKind.MC: mc_values,
    ObjectiveKind.CVAE: cvae_values,
    ObjectiveKind.MS: ms_values,
    ObjectiveKind.BMS: bms_values,
    ObjectiveKind.PRIOR_BMS: prior_bms_values,
    ObjectiveKind.REGRESSION: regression_values,
}


# --- sampling ---


def sample_logliks(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    recog: Optional[Module] = None,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, Optional[Tensor]]:
    """
    Roll out ``t`` futures per example and score them against ``batch.y``.

    Latents come from ``recog`` (reparameterized) when given, otherwise from
    the prior. Returns (B, T) log-likelihoods and, for recognition draws,
    the (B,) KL terms.
    """
    if t < 1:
        raise ValueError(f"T must be >= 1, got {t}")
    if batch.y is None:
        raise MissingY("Objectives need the future sequence y")
    gaussian = recog(batch.y) if recog is not None else None  # type: ignore[operator]
    z = model.draw_latents(batch.size, t, rng, gaussian)
    y_hat = model.predict(batch, z, reps=t, teacher_forcing=teacher_forcing)
    stacked = y_hat.reshape((t, batch.size) + y_hat.shape[1:])
    ll = decoder_loglik(stacked, batch.y, likelihood, batch_axes=2).transpose(1, 0)
    kl = kl_per_example(gaussian) if gaussian is not None else None
    return ll, kl


def _finish(
    kind: ObjectiveKind,
    values: Tensor,
    ll: Tensor,
    kl: Optional[Tensor],
    best: bool = False,
    **extra: object,
) -> Tuple[Tensor, ObjectiveReport]:
    value = mean(values)
    report = ObjectiveReport(
        objective_kind=kind,
        t=ll.shape[-1],
        value=value.item(),
        kl=float(np.mean(kl.data)) if kl is not None else 0.0,
        per_example_kl=kl.data.tolist() if kl is not None else [],
        per_sample_loglik=ll.data.tolist(),
        best_index=np.argmax(ll.data, axis=-1).tolist() if best else None,
        **extra,  # type: ignore[arg-type]
    )
    return -value, report


def obj_mc(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """Monte-Carlo log-likelihood with prior draws: ``log(1/T sum_i p(y|z_i, x))``."""
    ll, _ = sample_logliks(model, batch, t, rng, None, likelihood, teacher_forcing)
    return _finish(ObjectiveKind.MC, mc_values(ll), ll, None)


def obj_cvae(
    model: ConditionalModel,
    recog: Module,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """Variational lower bound: mean log-likelihood of recognition draws minus KL."""
    ll, kl = sample_logliks(model, batch, t, rng, recog, likelihood, teacher_forcing)
    assert kl is not None
    return _finish(ObjectiveKind.CVAE, cvae_values(ll, kl), ll, kl)


def obj_ms(
    model: ConditionalModel,
    recog: Module,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """Many-sample objective: log-average likelihood of recognition draws minus KL."""
    ll, kl = sample_logliks(model, batch, t, rng, recog, likelihood, teacher_forcing)
    assert kl is not None
    return _finish(ObjectiveKind.MS, ms_values(ll, kl), ll, kl)


def obj_bms(
    model: ConditionalModel,
    recog: Module,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """Best-of-many objective: best recognition draw's log-likelihood - log T - KL."""
    ll, kl = sample_logliks(model, batch, t, rng, recog, likelihood, teacher_forcing)
    assert kl is not None
    return _finish(ObjectiveKind.BMS, bms_values(ll, kl), ll, kl, best=True)


def obj_hybrid(
    model: ConditionalModel,
    recog: Module,
    batch: SequenceBatch,
    t: int,
    alpha: float,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """
    ``(1 - alpha) * MC + alpha * CVAE`` with independent draws per term.

    Raises:
        InvalidAlpha: If alpha is outside [0, 1]
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidAlpha(f"alpha must lie in [0, 1], got {alpha}", {"alpha": alpha})
    prior_ll, _ = sample_logliks(
        model, batch, t, rng.substream(0), None, likelihood, teacher_forcing
    )
    ll, kl = sample_logliks(
        model, batch, t, rng.substream(1), recog, likelihood, teacher_forcing
    )
    assert kl is not None
    values = mc_values(prior_ll) * (1.0 - alpha) + cvae_values(ll, kl) * alpha
    return _finish(
        ObjectiveKind.HYBRID,
        values,
        ll,
        kl,
        prior_loglik=prior_ll.data.tolist(),
        alpha=alpha,
    )


def obj_prior_bms(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """Best prior draw's log-likelihood, without KL or log T terms."""
    ll, _ = sample_logliks(model, batch, t, rng, None, likelihood, teacher_forcing)
    return _finish(ObjectiveKind.PRIOR_BMS, prior_bms_values(ll), ll, None, best=True)


def obj_regression(
    model: ConditionalModel,
    batch: SequenceBatch,
    rng: RngStream,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """Plain encoder-decoder log-likelihood; the model carries no latent."""
    ll, _ = sample_logliks(model, batch, 1, rng, None, likelihood, teacher_forcing)
    return _finish(ObjectiveKind.REGRESSION, regression_values(ll), ll, None)
