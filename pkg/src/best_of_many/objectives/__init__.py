from .adam import AdamState, adam_step
from .likelihood import decoder_loglik
from .registry import evaluate_objective, objective, objective_registry
from .sampling import (
    VALUE_FUNCTIONS,
    ObjectiveReport,
    bms_values,
    cvae_values,
    mc_values,
    ms_values,
    obj_bms,
    obj_cvae,
    obj_hybrid,
    obj_mc,
    obj_ms,
    obj_prior_bms,
    obj_regression,
    prior_bms_values,
    regression_values,
    sample_logliks,
)

__all__ = [
    "VALUE_FUNCTIONS",
    "AdamState",
    "ObjectiveReport",
    "adam_step",
    "bms_values",
    "cvae_values",
    "decoder_loglik",
    "evaluate_objective",
    "mc_values",
    "ms_values",
    "obj_bms",
    "obj_cvae",
    "obj_hybrid",
    "obj_mc",
    "obj_ms",
    "obj_prior_bms",
    "obj_regression",
    "objective",
    "objective_registry",
    "prior_bms_values",
    "regression_values",
    "sample_logliks",
]
