"""Exact GP likelihood and prediction."""

from sparse_gp.gp.checkpoint import (
    Checkpoint,
    load_checkpoint,
    read_predictions,
    restore_model,
    save_checkpoint,
    write_predictions,
)
from sparse_gp.gp.likelihood import dense_log_marginal_likelihood, log_marginal_likelihood, make_context
from sparse_gp.gp.models import (
    Dataset,
    LMLEvaluation,
    MeanFunction,
    MeanKind,
    NoiseKind,
    NoiseModel,
    PosteriorGaussian,
    SolverSettings,
    TrainedModel,
    VarianceKind,
    collect_slots,
)
from sparse_gp.gp.posterior import clamp_variances, dense_reference_fit_predict, fit_cache, posterior_predict

__all__ = [
    "Checkpoint",
    "Dataset",
    "LMLEvaluation",
    "MeanFunction",
    "MeanKind",
    "NoiseKind",
    "NoiseModel",
    "PosteriorGaussian",
    "SolverSettings",
    "TrainedModel",
    "VarianceKind",
    "clamp_variances",
    "collect_slots",
    "dense_log_marginal_likelihood",
    "dense_reference_fit_predict",
    "fit_cache",
    "load_checkpoint",
    "log_marginal_likelihood",
    "make_context",
    "posterior_predict",
    "read_predictions",
    "restore_model",
    "save_checkpoint",
    "write_predictions",
]
