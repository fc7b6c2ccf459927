"""Central finite-difference verification of tape gradients."""

import logging
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .ops import op_registry
from .rng import RngStream
from .tape import Tape
from .tensor import Tensor, use_dtype

logger = logging.getLogger(__name__)


class ParameterCheck(BaseModel):
    """Comparison of tape and finite-difference gradients for one parameter."""

    name: str = Field(description="Parameter name")
    max_rel_error: float = Field(description="Largest relative error over entries")
    max_abs_error: float = Field(description="Largest absolute error over entries")
    worst_index: List[int] = Field(
        default_factory=list, description="Index of the worst entry"
    )
    checked: int = Field(description="Number of entries compared")
    passed: bool


class GradCheckReport(BaseModel):
    """Per-parameter gradient check results for one component."""

    component: str = Field(description="Name of the checked op, cell or model")
    tol: float
    checks: List[ParameterCheck] = Field(default_factory=list)
    error: Optional[str] = Field(
        default=None, description="Failure outside the comparison"
    )

    @property
    def passed(self) -> bool:
        return self.error is None and all(check.passed for check in self.checks)

    @property
    def max_rel_error(self) -> float:
        return max((check.max_rel_error for check in self.checks), default=0.0)


def _scalar(f: Callable[[], Tensor]) -> float:
    return float(np.sum(f().data))


def grad_check(
    f: Callable[[], Tensor],
    params: Mapping[str, Tensor] | Sequence[Tensor],
    h: float = 1e-5,
    tol: float = 1e-4,
    floor: float = 1e-3,
    max_entries: Optional[int] = None,
    rng: Optional[RngStream] = None,
    component: str = "program",
) -> GradCheckReport:
    """
    Compare tape gradients of ``f`` with central finite differences.

    ``f`` must be deterministic and return a scalar tensor built from ``params``.
    The relative error of an entry is ``|tape - fd| / max(|tape|, |fd|, floor)``;
    entries below ``floor`` are therefore compared absolutely. When
    ``max_entries`` is set, that many entries per parameter are sampled with
    ``rng`` instead of checking all of them.
    """
    named: Dict[str, Tensor] = (
        dict(params)
        if isinstance(params, Mapping)
        else {p.name or f"param{i}": p for i, p in enumerate(params)}
    )
    report = GradCheckReport(component=component, tol=tol)

    with Tape() as tape:
        loss = f()
        grads = tape.backward(loss)

    for name, param in named.items():
        analytic = grads[param].reshape(-1)
        flat = param.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            picker = rng or RngStream(0)
            indices = np.sort(picker.permutation(flat.size)[:max_entries])

        worst_rel, worst_abs, worst = 0.0, 0.0, 0
        for index in indices:
            original = flat[index]
            flat[index] = original + h
            upper = _scalar(f)
            flat[index] = original - h
            lower = _scalar(f)
            flat[index] = original
            numeric = (upper - lower) / (2.0 * h)
            exact = float(analytic[index])
            abs_error = abs(exact - numeric)
            rel_error = abs_error / max(abs(exact), abs(numeric), floor)
            if rel_error > worst_rel:
                worst_rel, worst = rel_error, int(index)
            worst_abs = max(worst_abs, abs_error)

        report.checks.append(
            ParameterCheck(
                name=name,
                max_rel_error=worst_rel,
                max_abs_error=worst_abs,
                worst_index=[int(i) for i in np.unravel_index(worst, param.shape)],
                checked=len(indices),
                passed=worst_rel <= tol,
            )
        )

    if not report.passed:
        logger.warning(
            f"Gradient check failed for {component}: max relative error "
            f"{report.max_rel_error:.3e} > {tol:.1e}"
        )
    return report


def check_op(
    name: str, rng: RngStream, instances: int = 1, h: float = 1e-5, tol: float = 1e-4
) -> GradCheckReport:
    """
    Grad-check registered op ``name`` on random instances from its example generator.

    The loss is a fixed random weighting of the op output so every output
    entry contributes a distinct gradient.
    """
    op_def = op_registry.get(name)
    report = GradCheckReport(component=name, tol=tol)
    if op_def.example is None:
        report.error = f"op '{name}' has no example generator"
        return report

    with use_dtype("float64"):
        for instance in range(instances):
            draw = rng.substream(instance)
            arrays, kwargs = op_def.example(draw)
            inputs = [
                Tensor(array, requires_grad=True, name=f"input{i}")
                for i, array in enumerate(arrays)
            ]
            weights: Dict[str, np.ndarray] = {}

            def program() -> Tensor:
                from .ops import apply, mul, sum_

                out = apply(name, inputs, kwargs)
                if "w" not in weights:
                    weights["w"] = draw.substream(10_000).normal(out.shape)
                return sum_(mul(out, weights["w"]))

            result = grad_check(
                program,
                {t.name or "": t for t in inputs},
                h=h,
                tol=tol,
                component=name,
            )
            report.checks.extend(result.checks)
            if not result.passed:
                break
    return report


def check_registered_ops(
    rng: RngStream, instances: int = 100, tol: float = 1e-4
) -> List[GradCheckReport]:
    """Grad-check every registered op."""
    return [
        check_op(name, rng.substream(i), instances=instances, tol=tol)
        for i, name in enumerate(op_registry.names())
    ]
