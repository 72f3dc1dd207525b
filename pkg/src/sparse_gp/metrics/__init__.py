"""Prediction scoring."""

from sparse_gp.metrics.scoring import PredictionSet, brier, crps_gaussian, crps_gaussian_values, rmse, score

__all__ = ["PredictionSet", "brier", "crps_gaussian", "crps_gaussian_values", "rmse", "score"]
