"""Neural hazard-rate survival analysis.

An MLP regresses conditional hazard values from covariates plus a sinusoidal
time embedding; composite Simpson quadrature of ln(1 - h) turns hazards into
survival curves; training maximizes a censoring-aware likelihood on a uniform
time grid; evaluation uses the time-dependent concordance index.
"""

from .data import (
    Dataset,
    Sample,
    SynthSpec,
    k_fold,
    load_csv,
    normalize_apply,
    normalize_fit,
    save_csv,
    split,
    synth_exponential,
    synth_weibull,
)
from .metrics import CIResult, c_index_antolini, c_index_literal, comparable_pairs
from .model import (
    IntervalMasses,
    ModelParams,
    SurvivalCurve,
    hazard,
    init_params,
    interval_masses,
    loss,
    predict,
    survival_curve,
    survival_matrix,
)
from .serialize import ModelBundle, load_model, save_model
from .timegrid import IndicatorMask, TimeGrid, build_grid, indicator, interval_index
from .training import TrainConfig, adam_step, batch_iterator, train

__version__ = "0.1.0"

__all__ = [
    "CIResult",
    "Dataset",
    "IndicatorMask",
    "IntervalMasses",
    "ModelBundle",
    "ModelParams",
    "Sample",
    "SurvivalCurve",
    "SynthSpec",
    "TimeGrid",
    "TrainConfig",
    "adam_step",
    "batch_iterator",
    "build_grid",
    "c_index_antolini",
    "c_index_literal",
    "comparable_pairs",
    "hazard",
    "indicator",
    "init_params",
    "interval_index",
    "interval_masses",
    "k_fold",
    "load_csv",
    "load_model",
    "loss",
    "normalize_apply",
    "normalize_fit",
    "predict",
    "save_csv",
    "save_model",
    "split",
    "survival_curve",
    "survival_matrix",
    "synth_exponential",
    "synth_weibull",
    "train",
]
