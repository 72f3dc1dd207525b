"""Block-parallel assembly of the sparse covariance matrix."""

from __future__ import annotations

import concurrent.futures
import time
from typing import Mapping, Optional

import numpy as np
from scipy import sparse

from sparse_gp.assembly.models import AssemblyPlan, AssemblyReport, BlockRange
from sparse_gp.errors import AssemblyError, HyperparameterError, InputError
from sparse_gp.kernels.engine import KernelContext, gram_block
from sparse_gp.kernels.models import KernelSpec, PointSet
from sparse_gp.linalg.models import CompressedRowMatrix, TripletMatrix
from sparse_gp.linalg.sparse import add_diagonal, merge, sparsify_block, to_csr
from sparse_gp.monitoring.audit import AuditLog

DEFAULT_BLOCK_SIZE = 1000


def partition(n: int, block_size: int) -> list[BlockRange]:
    if n < 1 or block_size < 1:
        raise InputError(f"Invalid partition: n={n}, block_size={block_size}")
    return [BlockRange(start, min(start + block_size, n)) for start in range(0, n, block_size)]


def plan_assembly(n: int, block_size: int = DEFAULT_BLOCK_SIZE, workers: int = 1, retries: int = 1) -> AssemblyPlan:
    ranges = tuple(partition(n, block_size))
    pairs = tuple((a, b) for a in range(len(ranges)) for b in range(a, len(ranges)))
    return AssemblyPlan(n=n, block_size=block_size, ranges=ranges, pairs=pairs, workers=workers, retries=retries)


def compute_block(
    spec: KernelSpec,
    theta: Mapping[str, float],
    points: PointSet,
    a: BlockRange,
    b: BlockRange,
    context: Optional[KernelContext] = None,
    tag: Optional[tuple[int, int]] = None,
) -> TripletMatrix:
    if a.start > b.start:
        raise InputError("compute_block expects a <= b in block order")
    try:
        block = gram_block(spec, theta, points.take(a.start, a.end), points.take(b.start, b.end), context, validate=False)
    except Exception as exc:
        exc.add_note(f"while computing block pair {tag or (a.start, b.start)}")
        raise
    if a == b:
        block = np.triu(block)
    return sparsify_block(block, a.start, b.start, n=len(points), tag=tag)


def _run_pair(
    spec: KernelSpec,
    theta: Mapping[str, float],
    points: PointSet,
    plan: AssemblyPlan,
    pair: tuple[int, int],
    context: KernelContext,
) -> tuple[TripletMatrix, int]:
    attempts = 0
    while True:
        try:
            fragment = compute_block(spec, theta, points, plan.ranges[pair[0]], plan.ranges[pair[1]], context, pair)
            return fragment, attempts
        except HyperparameterError:
            raise
        except Exception as exc:
            attempts += 1
            if attempts > plan.retries:
                raise AssemblyError(f"worker failed after {attempts} attempts: {exc}", pair) from exc


def assemble(
    spec: KernelSpec,
    theta: Mapping[str, float],
    points: PointSet,
    noise: np.ndarray,
    plan: AssemblyPlan,
    context: Optional[KernelContext] = None,
    audit_log: Optional[AuditLog] = None,
) -> tuple[CompressedRowMatrix, AssemblyReport]:
    """K + diag(noise) in CSR form, identical for any worker count or completion order."""
    n = len(points)
    if plan.n != n:
        raise InputError(f"plan covers {plan.n} points but the dataset has {n}")
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (n,) or not np.all(np.isfinite(noise)) or np.any(noise < 0):
        raise InputError("noise must be a finite nonnegative vector of length n")
    spec.validate_theta(theta)
    context = context or KernelContext()

    started = time.perf_counter()
    fragments: dict[tuple[int, int], TripletMatrix] = {}
    retried = 0
    if plan.workers == 1:
        for pair in plan.pairs:
            fragments[pair], attempts = _run_pair(spec, theta, points, plan, pair, context)
            retried += attempts
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=plan.workers) as executor:
            futures = {
                executor.submit(_run_pair, spec, theta, points, plan, pair, context): pair for pair in plan.pairs
            }
            for future in concurrent.futures.as_completed(futures):
                fragments[futures[future]], attempts = future.result()
                retried += attempts
    t_covariance = time.perf_counter() - started

    started = time.perf_counter()
    merged = add_diagonal(merge(fragments.values(), n, mirror=True), noise)
    t_merge = time.perf_counter() - started

    started = time.perf_counter()
    matrix = to_csr(merged)
    t_csr = time.perf_counter() - started

    report = AssemblyReport(
        n=n,
        block_size=plan.block_size,
        workers=plan.workers,
        nnz=matrix.nnz,
        density=matrix.density,
        t_covariance_s=t_covariance,
        t_merge_s=t_merge,
        t_csr_s=t_csr,
        blocks=len(plan.pairs),
        retried=retried,
    )
    if audit_log is not None:
        audit_log.log("assembly", report.to_json())
    return matrix, report


def cross_covariance(
    spec: KernelSpec,
    theta: Mapping[str, float],
    train: PointSet,
    test: PointSet,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
    context: Optional[KernelContext] = None,
) -> sparse.csr_matrix:
    """Sparse n x m matrix of k(train_i, test_j) over all block pairs."""
    context = context or KernelContext()
    rows_ranges = partition(len(train), block_size)
    cols_ranges = partition(len(test), block_size)
    pairs = [(a, b) for a in rows_ranges for b in cols_ranges]

    def _block(pair: tuple[BlockRange, BlockRange]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a, b = pair
        block = gram_block(spec, theta, train.take(a.start, a.end), test.take(b.start, b.end), context, validate=False)
        r, c = np.nonzero(block)
        return r + a.start, c + b.start, block[r, c]

    spec.validate_theta(theta)
    if workers == 1:
        parts = [_block(pair) for pair in pairs]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_block, pairs))
    rows = np.concatenate([part[0] for part in parts])
    cols = np.concatenate([part[1] for part in parts])
    values = np.concatenate([part[2] for part in parts])
    return sparse.csr_matrix((values, (rows, cols)), shape=(len(train), len(test)))
