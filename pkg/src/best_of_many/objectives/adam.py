from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from ..exceptions import ShapeMismatch
from ..tensor import Tensor
from ..validation import AdamConfig


@dataclass
class AdamState:
    """First/second moment estimates per parameter name and the step count."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    cfg: Optional[AdamConfig] = None,
) -> AdamState:
    """
    Apply one bias-corrected Adam update to ``params`` in place.

    Missing gradients count as zero.

    Raises:
        ShapeMismatch: If a gradient or moment shape differs from its parameter
    """
    cfg = cfg or AdamConfig()
    state.t += 1
    correction1 = 1.0 - cfg.beta1**state.t
    correction2 = 1.0 - cfg.beta2**state.t
    for name, param in params.items():
        grad = grads.get(name)
        grad = np.zeros_like(param.data) if grad is None else np.asarray(grad)
        m = state.m.setdefault(name, np.zeros_like(param.data))
        v = state.v.setdefault(name, np.zeros_like(param.data))
        if any(a.shape != param.shape for a in (grad, m, v)):
            raise ShapeMismatch(
                f"adam_step: {name} has shape {param.shape}, gradient {grad.shape}, "
                f"moments {m.shape}/{v.shape}"
            )
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * grad
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * grad * grad
        step = cfg.lr * (m / correction1) / (np.sqrt(v / correction2) + cfg.eps)
        param.data -= step.astype(param.data.dtype, copy=False)
    return state
