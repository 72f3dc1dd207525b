"""Exact log marginal likelihood through the sparse pipeline."""

from __future__ import annotations

import math
import time
from typing import Mapping, Optional

import numpy as np

from sparse_gp.assembly.engine import assemble
from sparse_gp.assembly.models import AssemblyPlan
from sparse_gp.errors import DefinitenessError, HyperparameterError, SolverError
from sparse_gp.gp.models import Dataset, LMLEvaluation, MeanFunction, NoiseModel, SolverSettings, collect_slots
from sparse_gp.kernels.engine import KernelContext, gram_block
from sparse_gp.kernels.models import HyperparameterSlot, KernelSpec
from sparse_gp.linalg.dense import dense_cholesky, dense_logdet, dense_solve
from sparse_gp.linalg.solvers import minres, sparse_logdet
from sparse_gp.monitoring.audit import AuditLog
from sparse_gp.monitoring.monitor import Monitor

LOG_2PI = math.log(2.0 * math.pi)


def make_context(dataset: Dataset) -> KernelContext:
    return KernelContext(metric=dataset.metric, anchors=dataset.points)


def check_theta(slots: tuple[HyperparameterSlot, ...], theta: Mapping[str, float]) -> None:
    for slot in slots:
        if slot.name not in theta:
            raise HyperparameterError(f"Missing hyperparameter: {slot.name}")
        value = float(theta[slot.name])
        if not math.isfinite(value) or not slot.contains(value):
            raise HyperparameterError(f"Hyperparameter {slot.name}={value} outside [{slot.lower}, {slot.upper}]")


def log_marginal_likelihood(
    spec: KernelSpec,
    theta: Mapping[str, float],
    dataset: Dataset,
    noise: NoiseModel,
    mean: MeanFunction,
    plan: AssemblyPlan,
    solver: SolverSettings = SolverSettings(),
    context: Optional[KernelContext] = None,
    audit_log: Optional[AuditLog] = None,
    monitor: Optional[Monitor] = None,
    keep: bool = False,
) -> LMLEvaluation:
    """ln p(y | theta) including the Gaussian normalization constant.

    Solver and definiteness failures do not raise; they come back as an
    evaluation with ``valid=False`` so a sampler can reject the proposal.
    """
    started = time.perf_counter()
    check_theta(collect_slots(spec, noise, mean), theta)
    context = context or make_context(dataset)

    def _invalid(reason: str, error: Exception, **extra) -> LMLEvaluation:
        if audit_log is not None:
            audit_log.log("lml_invalid", {"reason": reason, "error": str(error)})
        return LMLEvaluation(
            value=-math.inf,
            valid=False,
            reason=reason,
            error=error,
            t_total_s=time.perf_counter() - started,
            **extra,
        )

    try:
        variances = noise.variances(dataset.x, theta)
        residual = dataset.y - mean.evaluate(dataset.x, theta)
        matrix, report = assemble(spec, theta, dataset.points, variances, plan, context, audit_log)
    except HyperparameterError as exc:
        return _invalid("kernel", exc)

    tick = time.perf_counter()
    alpha, solve_report = minres(matrix, residual, tol=solver.tol, maxiter=solver.maxiter)
    t_solve = time.perf_counter() - tick
    if not solve_report.converged:
        if monitor is not None:
            monitor.solver_stalled(solve_report.residual, solve_report.iterations)
        return _invalid(
            "minres",
            SolverError(f"MINRES stopped at residual {solve_report.residual:.3e}"),
            solve=solve_report,
            assembly=report,
            t_covariance_s=report.t_covariance_s + report.t_merge_s + report.t_csr_s,
            t_solve_s=t_solve,
        )

    tick = time.perf_counter()
    try:
        logdet_report = sparse_logdet(matrix, method=solver.logdet_method, ordering=solver.ordering)
    except DefinitenessError as exc:
        return _invalid("definiteness", exc, solve=solve_report, assembly=report)
    t_logdet = time.perf_counter() - tick
    if logdet_report.jitter > 0:
        if audit_log is not None:
            audit_log.log("jitter_applied", logdet_report.to_dict())
        if monitor is not None:
            monitor.jitter_applied(logdet_report.jitter, logdet_report.attempts)

    value = -0.5 * float(residual @ alpha) - 0.5 * logdet_report.value - 0.5 * dataset.n * LOG_2PI
    return LMLEvaluation(
        value=value,
        valid=True,
        solve=solve_report,
        logdet=logdet_report,
        assembly=report,
        t_covariance_s=report.t_covariance_s + report.t_merge_s + report.t_csr_s,
        t_solve_s=t_solve,
        t_logdet_s=t_logdet,
        t_total_s=time.perf_counter() - started,
        alpha=alpha if keep else None,
        matrix=matrix if keep else None,
    )


def dense_log_marginal_likelihood(
    spec: KernelSpec,
    theta: Mapping[str, float],
    dataset: Dataset,
    noise: NoiseModel,
    mean: MeanFunction,
) -> float:
    check_theta(collect_slots(spec, noise, mean), theta)
    context = make_context(dataset)
    covariance = gram_block(spec, theta, dataset.points, dataset.points, context)
    covariance[np.diag_indices_from(covariance)] += noise.variances(dataset.x, theta)
    factor = dense_cholesky(covariance)
    residual = dataset.y - mean.evaluate(dataset.x, theta)
    alpha = dense_solve(factor, residual)
    return -0.5 * float(residual @ alpha) - 0.5 * dense_logdet(factor) - 0.5 * dataset.n * LOG_2PI
