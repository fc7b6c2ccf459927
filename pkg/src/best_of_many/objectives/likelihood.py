import math
from typing import Optional

from ..exceptions import ShapeMismatch
from ..tensor import Tensor, as_tensor, sum_
from ..validation import LikelihoodConfig

_DEFAULT = LikelihoodConfig()


def decoder_loglik(
    y_hat: Tensor,
    y: Tensor,
    cfg: Optional[LikelihoodConfig] = None,
    batch_axes: int = 0,
) -> Tensor:
    """
    Isotropic Gaussian log-likelihood ``-|y_hat - y|^2 / (2 sigma^2)``.

    The first ``batch_axes`` axes of ``y_hat`` are kept, everything else is
    summed; ``y`` may omit leading axes and is broadcast. With
    ``include_normalizer`` each kept entry also gets ``-D/2 log(2 pi sigma^2)``
    for its D summed values.

    Raises:
        ShapeMismatch: If ``y`` does not match the trailing shape of ``y_hat``
    """
    cfg = cfg or _DEFAULT
    y = as_tensor(y)
    trailing = y_hat.shape[y_hat.ndim - y.ndim :]
    if trailing != y.shape or y.ndim < y_hat.ndim - batch_axes:
        raise ShapeMismatch(
            f"decoder_loglik: prediction {y_hat.shape} does not match target {y.shape}",
            {"prediction": list(y_hat.shape), "target": list(y.shape)},
        )
    summed = tuple(range(batch_axes, y_hat.ndim))
    variance = cfg.sigma_dec**2
    residual = (y_hat - y).square()
    total = sum_(residual, axis=summed) if summed else residual
    loglik = total * (-0.5 / variance)
    if cfg.include_normalizer:
        dims = math.prod(y_hat.shape[batch_axes:])
        loglik = loglik - 0.5 * dims * math.log(2.0 * math.pi * variance)
    return loglik
