"""Dense Cholesky reference used as the oracle and for the base GP."""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from sparse_gp.errors import DefinitenessError, InputError

DENSE_LIMIT = 5000

DenseFactor = tuple[np.ndarray, bool]


def _check(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("dense routines need a square matrix")
    if a.shape[0] > DENSE_LIMIT:
        raise InputError(f"dense work limited to n <= {DENSE_LIMIT}, got {a.shape[0]}")
    return a


def dense_cholesky(a: np.ndarray) -> DenseFactor:
    a = _check(a)
    try:
        return cho_factor(a, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise DefinitenessError(f"dense Cholesky failed: {exc}") from exc


def dense_solve(a: np.ndarray | DenseFactor, b: np.ndarray) -> np.ndarray:
    factor = a if isinstance(a, tuple) else dense_cholesky(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor[0].shape[0]:
        raise InputError(f"right-hand side length {b.shape[0]} does not match dimension {factor[0].shape[0]}")
    return cho_solve(factor, b)


def dense_logdet(a: np.ndarray | DenseFactor) -> float:
    factor = a if isinstance(a, tuple) else dense_cholesky(a)
    return float(2.0 * np.sum(np.log(np.diag(factor[0]))))
