"""Cached fits and posterior prediction, sparse and dense."""

from __future__ import annotations

import concurrent.futures
from typing import Mapping, Optional

import numpy as np

from sparse_gp.assembly.engine import cross_covariance
from sparse_gp.assembly.models import AssemblyPlan
from sparse_gp.errors import InputError
from sparse_gp.gp.likelihood import check_theta, log_marginal_likelihood, make_context
from sparse_gp.gp.models import (
    Dataset,
    MeanFunction,
    NoiseKind,
    NoiseModel,
    PosteriorGaussian,
    SolverSettings,
    TrainedModel,
    VarianceKind,
    collect_slots,
)
from sparse_gp.kernels.engine import gram_block, gram_diagonal
from sparse_gp.kernels.models import KernelSpec, PointSet
from sparse_gp.linalg.dense import dense_cholesky, dense_solve
from sparse_gp.linalg.solvers import minres
from sparse_gp.monitoring.audit import AuditLog
from sparse_gp.monitoring.monitor import Monitor

CLAMP_RELATIVE = 1e-8


def fit_cache(
    spec: KernelSpec,
    theta: Mapping[str, float],
    dataset: Dataset,
    noise: NoiseModel,
    mean: MeanFunction,
    plan: AssemblyPlan,
    solver: SolverSettings = SolverSettings(),
    audit_log: Optional[AuditLog] = None,
    monitor: Optional[Monitor] = None,
) -> TrainedModel:
    evaluation = log_marginal_likelihood(
        spec, theta, dataset, noise, mean, plan, solver, audit_log=audit_log, monitor=monitor, keep=True
    )
    if not evaluation.valid:
        raise evaluation.error
    return TrainedModel(
        spec=spec,
        theta={name: float(value) for name, value in theta.items()},
        dataset=dataset,
        noise=noise,
        mean=mean,
        plan=plan,
        solver=solver,
        alpha=evaluation.alpha,
        matrix=evaluation.matrix,
        assembly=evaluation.assembly,
        log_marginal_likelihood=evaluation.value,
        fingerprint=dataset.fingerprint(),
    )


def _as_points(test: PointSet | np.ndarray, dim: int) -> PointSet:
    points = test if isinstance(test, PointSet) else PointSet(np.asarray(test, dtype=float))
    if points.indices is not None:
        points = PointSet(points.coords)
    if points.dim != dim:
        raise InputError(f"test points have dimension {points.dim}, training data {dim}")
    return points


def _test_noise(
    noise: NoiseModel, coords: np.ndarray, theta: Mapping[str, float], test_noise: Optional[np.ndarray]
) -> np.ndarray:
    if test_noise is not None:
        test_noise = np.asarray(test_noise, dtype=float)
        if test_noise.shape != (coords.shape[0],):
            raise InputError("test noise must have one variance per test point")
        return test_noise
    if noise.kind == NoiseKind.PER_POINT:
        raise InputError("per-point noise needs explicit test variances for y-variance predictions")
    return noise.variances(coords, theta)


def clamp_variances(
    variance: np.ndarray,
    prior: np.ndarray,
    audit_log: Optional[AuditLog] = None,
    monitor: Optional[Monitor] = None,
) -> tuple[np.ndarray, int, int]:
    """Zero out negative variances; those below -1e-8 * prior are also reported."""
    negative = variance < 0
    severe = negative & (variance < -CLAMP_RELATIVE * np.abs(prior))
    clamped = int(np.count_nonzero(negative))
    warned = int(np.count_nonzero(severe))
    if warned:
        worst = float(variance[severe].min())
        if audit_log is not None:
            audit_log.log("variance_clamped", {"clamped": clamped, "warned": warned, "worst": worst})
        if monitor is not None:
            monitor.negative_variance(warned, worst)
    return np.where(negative, 0.0, variance), clamped, warned


def posterior_predict(
    model: TrainedModel,
    test: PointSet | np.ndarray,
    kind: VarianceKind = VarianceKind.LATENT,
    test_noise: Optional[np.ndarray] = None,
    audit_log: Optional[AuditLog] = None,
    monitor: Optional[Monitor] = None,
) -> PosteriorGaussian:
    """Posterior mean and variance with one fresh MINRES solve per test point."""
    points = _as_points(test, model.dataset.dim)
    context = make_context(model.dataset)
    cross = cross_covariance(
        model.spec, model.theta, model.dataset.points, points, model.plan.block_size, model.plan.workers, context
    ).tocsc()
    prior = gram_diagonal(model.spec, model.theta, points, context)
    mean = model.mean.evaluate(points.coords, model.theta) + cross.T @ model.alpha

    def _reduction(j: int) -> tuple[float, bool]:
        column = cross.getcol(j)
        if column.nnz == 0:
            return 0.0, True
        k_star = column.toarray().ravel()
        w, report = minres(model.matrix, k_star, tol=model.solver.predict_tol, maxiter=model.solver.maxiter)
        return float(k_star @ w), report.converged

    if model.plan.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=model.plan.workers) as executor:
            results = list(executor.map(_reduction, range(len(points))))
    else:
        results = [_reduction(j) for j in range(len(points))]
    reduction = np.array([value for value, _ in results])
    failed = np.array([not converged for _, converged in results], dtype=bool)
    if failed.any():
        if audit_log is not None:
            audit_log.log("prediction_solve_failed", {"points": np.flatnonzero(failed).tolist()})
        if monitor is not None:
            monitor.solver_stalled(float("nan"), int(failed.sum()))

    variance, clamped, warned = clamp_variances(prior - reduction, prior, audit_log, monitor)
    if kind == VarianceKind.OBSERVED:
        variance = variance + _test_noise(model.noise, points.coords, model.theta, test_noise)
    return PosteriorGaussian(mean=mean, variance=variance, kind=kind, failed=failed, clamped=clamped, warned=warned)


def dense_reference_fit_predict(
    dataset: Dataset,
    spec: KernelSpec,
    theta: Mapping[str, float],
    test: PointSet | np.ndarray,
    noise: NoiseModel,
    mean: Optional[MeanFunction] = None,
    kind: VarianceKind = VarianceKind.LATENT,
    test_noise: Optional[np.ndarray] = None,
) -> PosteriorGaussian:
    if dataset.n < 1:
        raise InputError("dense reference needs a nonempty training set")
    mean = mean or MeanFunction()
    check_theta(collect_slots(spec, noise, mean), theta)
    points = _as_points(test, dataset.dim)
    context = make_context(dataset)
    covariance = gram_block(spec, theta, dataset.points, dataset.points, context)
    covariance[np.diag_indices_from(covariance)] += noise.variances(dataset.x, theta)
    factor = dense_cholesky(covariance)
    residual = dataset.y - mean.evaluate(dataset.x, theta)
    alpha = dense_solve(factor, residual)
    cross = gram_block(spec, theta, dataset.points, points, context)
    prior = gram_diagonal(spec, theta, points, context)
    mu = mean.evaluate(points.coords, theta) + cross.T @ alpha
    reduction = np.sum(cross * dense_solve(factor, cross), axis=0)
    variance, clamped, warned = clamp_variances(prior - reduction, prior)
    if kind == VarianceKind.OBSERVED:
        variance = variance + _test_noise(noise, points.coords, theta, test_noise)
    return PosteriorGaussian(mean=mu, variance=variance, kind=kind, clamped=clamped, warned=warned)
