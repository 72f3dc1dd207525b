"""Point and probabilistic scores for predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from sparse_gp.errors import InputError

INV_SQRT_PI = 1.0 / np.sqrt(np.pi)


@dataclass(frozen=True, eq=False)
class PredictionSet:
    mean: np.ndarray
    std: np.ndarray
    truth: np.ndarray

    def __post_init__(self) -> None:
        mean, std, truth = (np.asarray(a, dtype=float).reshape(-1) for a in (self.mean, self.std, self.truth))
        if not (mean.shape == std.shape == truth.shape):
            raise InputError("mean, std and truth must have equal lengths")
        if mean.size == 0:
            raise InputError("prediction set is empty")
        if np.any(std < 0):
            raise InputError("predictive standard deviations must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)
        object.__setattr__(self, "truth", truth)

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.truth == 0.0) | (self.truth == 1.0)))


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise InputError("scores need nonempty inputs")
    if a.shape != b.shape:
        raise InputError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def rmse(means: np.ndarray, truths: np.ndarray) -> float:
    means, truths = _pair(means, truths)
    return float(np.sqrt(np.mean((means - truths) ** 2)))


def crps_gaussian_values(mu: np.ndarray, sigma: np.ndarray, y: np.ndarray) -> np.ndarray:
    mu, y = _pair(mu, y)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), mu.shape)
    if np.any(sigma < 0):
        raise InputError("CRPS needs sigma >= 0")
    out = np.abs(mu - y)
    spread = sigma > 0
    s = sigma[spread]
    z = (y[spread] - mu[spread]) / s
    out[spread] = s * (z * (2.0 * norm.cdf(z) - 1.0) + 2.0 * norm.pdf(z) - INV_SQRT_PI)
    return out


def crps_gaussian(mu: np.ndarray, sigma: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(crps_gaussian_values(np.atleast_1d(mu), np.atleast_1d(sigma), np.atleast_1d(y))))


def brier(probabilities: np.ndarray, labels: np.ndarray) -> float:
    probabilities, labels = _pair(probabilities, labels)
    if np.any((probabilities < 0) | (probabilities > 1)):
        raise InputError("probabilities must lie in [0, 1]")
    if np.any((labels != 0) & (labels != 1)):
        raise InputError("labels must be 0 or 1")
    return float(np.mean((probabilities - labels) ** 2))


def score(predictions: PredictionSet, include_brier: Optional[bool] = None) -> dict[str, float | int | None]:
    """rmse, crps and (for 0/1 truths) brier with the mean clipped to [0, 1]."""
    include_brier = predictions.is_binary if include_brier is None else include_brier
    return {
        "rmse": rmse(predictions.mean, predictions.truth),
        "crps": crps_gaussian(predictions.mean, predictions.std, predictions.truth),
        "brier": brier(np.clip(predictions.mean, 0.0, 1.0), predictions.truth) if include_brier else None,
        "n_test": int(predictions.mean.size),
    }
