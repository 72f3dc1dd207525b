"""Kernel building blocks: distances, Wendland, Matern, bumps and deltas.

Array helpers work on whole blocks; the scalar operations wrap them so that a
single pair and a Gram block go through identical arithmetic.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from sparse_gp.errors import HyperparameterError, InputError
from sparse_gp.kernels.models import (
    BumpFunction,
    BumpGroup,
    DeltaGroup,
    DistanceMetric,
    MetricTag,
    ParametricField,
    Point,
    WendlandForm,
)

BUMP_GUARD = 1e-14
SQRT3 = math.sqrt(3.0)


def pairwise_distance(a: np.ndarray, b: np.ndarray, metric: DistanceMetric) -> np.ndarray:
    if a.shape[1] != b.shape[1]:
        raise InputError(f"Dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    diff = metric.scale(a)[:, None, :] - metric.scale(b)[None, :, :]
    if metric.tag == MetricTag.L1:
        return np.sum(np.abs(diff), axis=2)
    return np.sqrt(np.sum(diff * diff, axis=2))


def wendland_values(d: np.ndarray, r0: float, form: WendlandForm = WendlandForm.PRINTED) -> np.ndarray:
    if not r0 > 0:
        raise HyperparameterError(f"Wendland support radius must be positive, got {r0}")
    t = np.asarray(d, dtype=float) / r0
    out = np.zeros_like(t)
    inside = t < 1.0
    ti = t[inside]
    out[inside] = (1.0 - ti) ** 8 * (form.cubic_coefficient * ti**3 + 25.0 * ti**2 + 8.0 * ti + 1.0)
    return out


def matern32_values(d: np.ndarray, length_scale: float, sigma: float) -> np.ndarray:
    if not length_scale > 0 or not sigma > 0:
        raise HyperparameterError("Matern length scale and sigma must be positive")
    s = SQRT3 * np.asarray(d, dtype=float) / length_scale
    return sigma**2 * (1.0 + s) * np.exp(-s)


def bump_values(coords: np.ndarray, bump: BumpFunction) -> np.ndarray:
    center = np.asarray(bump.center, dtype=float)
    if center.shape[0] != coords.shape[1]:
        raise InputError("bump center dimension does not match the points")
    q = np.sum((coords - center) ** 2, axis=1) / bump.radius**2
    out = np.zeros(coords.shape[0])
    inside = q < 1.0
    gap = np.maximum(1.0 - q[inside], BUMP_GUARD)
    out[inside] = bump.amplitude * np.exp(bump.shape * (1.0 - 1.0 / gap))
    return out


def bump_group_values(coords: np.ndarray, groups: Sequence[BumpGroup], theta: Mapping[str, float]) -> np.ndarray:
    """g_u(x) for every point (rows) and group (columns)."""
    out = np.zeros((coords.shape[0], len(groups)))
    for u, group in enumerate(groups):
        for bump in group.bumps(theta):
            out[:, u] += bump_values(coords, bump)
    return out


def outer_sum(g_a: np.ndarray, g_b: np.ndarray) -> np.ndarray:
    # column-by-column outer products keep k(x, y) == k(y, x) bit for bit
    out = np.zeros((g_a.shape[0], g_b.shape[0]))
    for u in range(g_a.shape[1]):
        out += np.outer(g_a[:, u], g_b[:, u])
    return out


def length_diagonals(
    fields: Sequence[ParametricField], coords: np.ndarray, theta: Mapping[str, float]
) -> np.ndarray:
    """Diagonal of Sigma(x) (squared length scales), shape (n, d)."""
    if len(fields) == 1:
        scale = fields[0].evaluate(coords, theta)
        return np.repeat((scale**2)[:, None], coords.shape[1], axis=1)
    if len(fields) != coords.shape[1]:
        raise InputError(f"{len(fields)} length fields for dimension {coords.shape[1]}")
    return np.stack([item.evaluate(coords, theta) ** 2 for item in fields], axis=1)


def convolution_terms(
    a: np.ndarray,
    b: np.ndarray,
    diag_a: np.ndarray,
    diag_b: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Determinant prefactor and sqrt(Q) of the convolution construction."""
    if a.shape[1] != b.shape[1]:
        raise InputError(f"Dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    avg = (diag_a[:, None, :] + diag_b[None, :, :]) / 2.0
    diff = a[:, None, :] - b[None, :, :]
    q = np.sum(diff * diff / avg, axis=2)
    det_a = np.prod(diag_a, axis=1) ** 0.25
    det_b = np.prod(diag_b, axis=1) ** 0.25
    prefactor = np.outer(det_a, det_b) / np.sqrt(np.prod(avg, axis=2))
    if not np.all(np.isfinite(prefactor)):
        raise HyperparameterError("non-finite length-scale field output")
    return prefactor, np.sqrt(q)


def distance(p: Point, q: Point, metric: DistanceMetric = DistanceMetric()) -> float:
    if len(p.coords) != len(q.coords):
        raise InputError(f"Dimension mismatch: {len(p.coords)} vs {len(q.coords)}")
    return float(pairwise_distance(np.array([p.coords]), np.array([q.coords]), metric)[0, 0])


def wendland(d: float, r0: float, form: WendlandForm = WendlandForm.PRINTED) -> float:
    return float(wendland_values(np.array([d]), r0, form)[0])


def matern32(d: float, length_scale: float, sigma: float) -> float:
    return float(matern32_values(np.array([d]), length_scale, sigma)[0])


def bump_eval(bump: BumpFunction, x: Point) -> float:
    return float(bump_values(np.array([x.coords]), bump)[0])


def nonstat_wendland(
    x_i: Point,
    x_j: Point,
    signal: ParametricField,
    length: Sequence[ParametricField],
    r0: float,
    theta: Mapping[str, float] | None = None,
    form: WendlandForm = WendlandForm.PRINTED,
) -> float:
    theta = theta or {}
    a = np.array([x_i.coords], dtype=float)
    b = np.array([x_j.coords], dtype=float)
    prefactor, root_q = convolution_terms(
        a, b, length_diagonals(length, a, theta), length_diagonals(length, b, theta)
    )
    sigma = np.outer(signal.evaluate(a, theta), signal.evaluate(b, theta))
    return float((sigma * prefactor * wendland_values(root_q, r0, form))[0, 0])


def bump_farfield(
    x_i: Point, x_j: Point, groups: Sequence[BumpGroup], theta: Mapping[str, float] | None = None
) -> float:
    theta = theta or {}
    g_i = bump_group_values(np.array([x_i.coords], dtype=float), groups, theta)
    g_j = bump_group_values(np.array([x_j.coords], dtype=float), groups, theta)
    return float(outer_sum(g_i, g_j)[0, 0])


def delta_farfield(x_i: Point, x_j: Point, groups: Sequence[DeltaGroup]) -> float:
    if x_i.index is None or x_j.index is None:
        return 0.0
    return float(sum(1 for group in groups if x_i.index in group.members and x_j.index in group.members))
