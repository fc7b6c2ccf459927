from typing import List, Optional

from pydantic import BaseModel, Field

from ..objectives.likelihood import decoder_loglik
from ..tensor import Tensor
from ..validation import LikelihoodConfig
from .base import ConditionalModel
from .batch import SequenceBatch


class FactorizationReport(BaseModel):
    """Whole-sequence vs per-step decoder log-likelihood."""

    per_step: List[float] = Field(description="Per-step log-likelihood terms")
    stepwise_total: float
    whole_sequence: float
    abs_diff: float
    tol: float
    passed: bool


def log_likelihood_factorization_check(
    m: ConditionalModel,
    x: Tensor,
    y: Tensor,
    z: Tensor,
    cfg: Optional[LikelihoodConfig] = None,
    tol: float = 1e-10,
    corrupt_step: Optional[int] = None,
    scene: Optional[Tensor] = None,
) -> FactorizationReport:
    """
    Check that the sequence log-likelihood equals the sum of per-step terms.

    The whole-sequence path decodes every step and scores the stacked
    prediction at once; the stepwise path scores each decoder step as it is
    produced. ``corrupt_step`` shifts one stepwise prediction by 1 as a
    negative control.
    """
    cfg = cfg or LikelihoodConfig()
    batch = SequenceBatch(x=x, y=y, kind=m.batch_kind, scene=scene)
    t_fut = y.shape[1]

    context = m.encode(batch)
    whole = decoder_loglik(m.decode(context, z, t_fut), y, cfg).item()

    per_step: List[float] = []
    for t, step in enumerate(m.decode_steps(m.encode(batch), z, t_fut)):
        if t == corrupt_step:
            step = step + 1.0
        per_step.append(decoder_loglik(step, y[:, t : t + 1], cfg).item())

    stepwise = float(sum(per_step))
    diff = abs(stepwise - whole)
    return FactorizationReport(
        per_step=per_step,
        stepwise_total=stepwise,
        whole_sequence=whole,
        abs_diff=diff,
        tol=tol,
        passed=diff <= tol * max(1.0, abs(whole)),
    )
