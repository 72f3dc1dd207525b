"""MINRES solves and sparse Cholesky log-determinants."""

from __future__ import annotations

from typing import Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from sparse_gp.errors import DefinitenessError, InputError
from sparse_gp.linalg.models import CompressedRowMatrix, LogdetReport, SolveReport

try:  # optional CHOLMOD backend
    from sksparse.cholmod import CholmodNotPositiveDefiniteError, cholesky as cholmod_cholesky
except ImportError:  # pragma: no cover - depends on environment
    cholmod_cholesky = None
    CholmodNotPositiveDefiniteError = None

DEFAULT_TOL = 1e-8
JITTER_START = 1e-10
JITTER_STOP = 1e-4
SPLU_ORDERINGS = ("MMD_AT_PLUS_A", "COLAMD", "MMD_ATA", "NATURAL")

MatrixLike = Union[CompressedRowMatrix, sparse.spmatrix, np.ndarray]


def _as_operator(a: MatrixLike):
    if isinstance(a, CompressedRowMatrix):
        return a.to_scipy()
    return a


def _jacobi(operator) -> Optional[splinalg.LinearOperator]:
    if not sparse.issparse(operator) and not isinstance(operator, np.ndarray):
        return None
    diagonal = np.asarray(operator.diagonal(), dtype=float)
    if not np.all(np.isfinite(diagonal)) or np.any(diagonal <= 0.0):
        return None
    inverse = 1.0 / diagonal
    return splinalg.LinearOperator(operator.shape, matvec=lambda v: inverse * np.ravel(v), dtype=float)


def minres(
    a: MatrixLike,
    b: np.ndarray,
    tol: float = DEFAULT_TOL,
    maxiter: Optional[int] = None,
    x0: Optional[np.ndarray] = None,
    restarts: Optional[int] = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve ``a x = b`` until the recomputed relative residual is at most ``tol``.

    The solve is Jacobi-preconditioned when the diagonal is positive. SciPy's
    MINRES stops on its own residual estimate, so the true residual is
    checked afterwards and the solve restarted from the current iterate with a
    tighter internal tolerance when it falls short. Restarts continue until
    ``maxiter`` (default 10n, summed over all restarts) is spent, the residual
    stops improving, or ``restarts`` is reached when given.
    """
    if not tol > 0:
        raise InputError("solver tolerance must be positive")
    operator = _as_operator(a)
    b = np.asarray(b, dtype=float)
    n = operator.shape[0]
    if b.shape != (n,):
        raise InputError(f"right-hand side length {b.shape[0]} does not match dimension {n}")
    maxiter = 10 * n if maxiter is None else maxiter
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n), SolveReport(iterations=0, residual=0.0, converged=True, tolerance=tol)

    counter = {"iterations": 0}

    def _count(_xk: np.ndarray) -> None:
        counter["iterations"] += 1

    preconditioner = _jacobi(operator)
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    inner_tol = tol
    residual = float(np.linalg.norm(b - operator @ x)) / b_norm
    passes = 0
    stalls = 0
    while residual > tol:
        remaining = maxiter - counter["iterations"]
        if remaining <= 0 or (restarts is not None and passes > restarts):
            break
        candidate, _info = splinalg.minres(
            operator, b, x0=x, M=preconditioner, rtol=inner_tol, maxiter=remaining, callback=_count
        )
        passes += 1
        updated = float(np.linalg.norm(b - operator @ candidate)) / b_norm
        if not np.isfinite(updated):
            residual = updated
            break
        if updated < residual:
            x, residual = candidate, updated
            stalls = 0
        else:
            stalls += 1
            if stalls >= 3:
                break
        inner_tol = max(inner_tol * 0.1, np.finfo(float).eps)
    converged = bool(np.isfinite(residual) and residual <= tol)
    return x, SolveReport(
        iterations=counter["iterations"],
        residual=residual,
        converged=converged,
        tolerance=tol,
    )


def jitter_schedule(mean_diagonal: float) -> list[float]:
    steps = int(round(np.log10(JITTER_STOP / JITTER_START))) + 1
    return [mean_diagonal * JITTER_START * 10.0**k for k in range(steps)]


def _splu_logdet(csc: sparse.csc_matrix, ordering: str) -> Optional[float]:
    try:
        lu = splinalg.splu(
            csc,
            permc_spec=ordering,
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError:
        return None
    pivots = lu.U.diagonal()
    if not np.all(np.isfinite(pivots)):
        return None
    # only a symmetric elimination with positive pivots certifies definiteness
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0.0):
        return None
    return float(np.sum(np.log(pivots)))


def _cholmod_logdet(csc: sparse.csc_matrix, ordering: str, beta: float) -> Optional[float]:
    try:
        factor = cholmod_cholesky(csc, beta=beta, ordering_method=ordering)
    except CholmodNotPositiveDefiniteError:
        return None
    value = float(factor.logdet())
    return value if np.isfinite(value) else None


def sparse_logdet(
    a: MatrixLike,
    method: str = "auto",
    ordering: Optional[str] = None,
) -> LogdetReport:
    """ln|a| through a sparse Cholesky-type factorization with a fill-reducing ordering.

    On breakdown the diagonal is shifted by an escalating jitter (1e-10 up to
    1e-4 times the mean diagonal, in factors of ten). The applied jitter is
    part of the report.
    """
    matrix = _as_operator(a)
    if not sparse.issparse(matrix):
        matrix = sparse.csr_matrix(np.asarray(matrix, dtype=float))
    n = matrix.shape[0]
    if n == 0:
        return LogdetReport(value=0.0, method="empty", ordering="none")
    csc = sparse.csc_matrix(matrix, dtype=float)
    if method == "auto":
        method = "cholmod" if cholmod_cholesky is not None else "splu"
    if method == "cholmod":
        if cholmod_cholesky is None:
            raise InputError("CHOLMOD backend requested but scikit-sparse is not installed")
        ordering = ordering or "amd"
    elif method == "splu":
        ordering = ordering or SPLU_ORDERINGS[0]
        if ordering not in SPLU_ORDERINGS:
            raise InputError(f"Invalid ordering: {ordering}")
    else:
        raise InputError(f"Invalid logdet method: {method}")

    mean_diagonal = float(np.mean(csc.diagonal()))
    shifts = [0.0]
    if np.isfinite(mean_diagonal) and mean_diagonal > 0:
        shifts.extend(jitter_schedule(mean_diagonal))
    identity = sparse.identity(n, format="csc")
    for attempt, jitter in enumerate(shifts, start=1):
        if method == "cholmod":
            value = _cholmod_logdet(csc, ordering, jitter)
        else:
            shifted = csc if jitter == 0.0 else (csc + jitter * identity).tocsc()
            value = _splu_logdet(shifted, ordering)
        if value is not None:
            return LogdetReport(value=value, method=method, ordering=ordering, jitter=jitter, attempts=attempt)
    raise DefinitenessError(
        f"matrix is not positive definite after jitter up to {shifts[-1]:.3e} ({method}/{ordering})"
    )
