"""Registry that dispatches training objectives by kind."""

from typing import Callable, Dict, List, Optional, Tuple

from ..constants import ObjectiveKind
from ..exceptions import ConfigError
from ..models.base import ConditionalModel
from ..models.batch import SequenceBatch
from ..nn import Module
from ..tensor import RngStream, Tensor
from ..validation import LikelihoodConfig
from .sampling import (
    ObjectiveReport,
    obj_bms,
    obj_cvae,
    obj_hybrid,
    obj_mc,
    obj_ms,
    obj_prior_bms,
    obj_regression,
)


def _recognizer(model: ConditionalModel) -> Module:
    if model.recognizer is None:
        raise ConfigError(
            f"{model.kind.value} model was built without a recognition network"
        )
    return model.recognizer


ObjectiveFn = Callable[..., Tuple[Tensor, ObjectiveReport]]


class ObjectiveRegistry:
    """
    Registry of training objectives with a uniform call signature.
    """

    def __init__(self) -> None:
        self.objectives: Dict[ObjectiveKind, ObjectiveFn] = {}

    def register(self, kind: ObjectiveKind, fn: ObjectiveFn) -> None:
        """
        Register an objective in the registry.
        """
        if kind in self.objectives:
            raise ValueError(f"Objective with kind '{kind.value}' already exists")
        self.objectives[kind] = fn

    def get(self, kind: ObjectiveKind | str) -> ObjectiveFn:
        return self.objectives[ObjectiveKind(kind)]

    def kinds(self) -> List[ObjectiveKind]:
        return list(self.objectives)


# Global registry instance
objective_registry = ObjectiveRegistry()


def objective(kind: ObjectiveKind) -> Callable[[ObjectiveFn], ObjectiveFn]:
    """
    Decorator to register an objective adapter.
    """

    def decorator(fn: ObjectiveFn) -> ObjectiveFn:
        objective_registry.register(kind, fn)
        return fn

    return decorator


@objective(ObjectiveKind.MC)
def _mc(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    return obj_mc(model, batch, t, rng, likelihood, teacher_forcing)


@objective(ObjectiveKind.CVAE)
def _cvae(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    recog = _recognizer(model)
    return obj_cvae(model, recog, batch, t, rng, likelihood, teacher_forcing)


@objective(ObjectiveKind.MS)
def _ms(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    return obj_ms(model, _recognizer(model), batch, t, rng, likelihood, teacher_forcing)


@objective(ObjectiveKind.BMS)
def _bms(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    recog = _recognizer(model)
    return obj_bms(model, recog, batch, t, rng, likelihood, teacher_forcing)


@objective(ObjectiveKind.HYBRID)
def _hybrid(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    return obj_hybrid(
        model, _recognizer(model), batch, t, alpha, rng, likelihood, teacher_forcing
    )


@objective(ObjectiveKind.PRIOR_BMS)
def _prior_bms(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    return obj_prior_bms(model, batch, t, rng, likelihood, teacher_forcing)


@objective(ObjectiveKind.REGRESSION)
def _regression(
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float,
    likelihood: Optional[LikelihoodConfig],
    teacher_forcing: bool,
) -> Tuple[Tensor, ObjectiveReport]:
    return obj_regression(model, batch, rng, likelihood, teacher_forcing)


def evaluate_objective(
    kind: ObjectiveKind | str,
    model: ConditionalModel,
    batch: SequenceBatch,
    t: int,
    rng: RngStream,
    alpha: float = 0.5,
    likelihood: Optional[LikelihoodConfig] = None,
    teacher_forcing: bool = False,
) -> Tuple[Tensor, ObjectiveReport]:
    """
    Evaluate the objective registered for ``kind``.

    Raises:
        ConfigError: If the objective needs a recognition network the model lacks
    """
    kind = ObjectiveKind(kind)
    fn = objective_registry.get(kind)
    return fn(model, batch, t, rng, alpha, likelihood, teacher_forcing)
