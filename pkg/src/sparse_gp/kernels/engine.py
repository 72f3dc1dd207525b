"""Recursive evaluation of kernel specs over point blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from sparse_gp.errors import HyperparameterError, InputError
from sparse_gp.kernels.functions import (
    bump_group_values,
    convolution_terms,
    length_diagonals,
    matern32_values,
    outer_sum,
    pairwise_distance,
    wendland_values,
)
from sparse_gp.kernels.models import (
    BumpFarfield,
    DeltaFarfield,
    DistanceMetric,
    KernelNode,
    KernelSpec,
    Matern32,
    MetricTag,
    NonstatMatern,
    NonstatWendland,
    Point,
    PointSet,
    Product,
    Scale,
    SplitFarfield,
    Sum,
    Wendland,
    resolve,
)


@dataclass(eq=False)
class KernelContext:
    """Evaluation context: distance metric plus the anchor dataset for delta groups."""

    metric: DistanceMetric = field(default_factory=DistanceMetric)
    anchors: Optional[PointSet] = None

    @cached_property
    def anchor_tree(self) -> cKDTree:
        if self.anchors is None:
            raise InputError("radius-rule delta groups need a bound anchor dataset")
        return cKDTree(self.metric.scale(self.anchors.coords))


def gram_block(
    spec: KernelSpec,
    theta: Mapping[str, float],
    a: Union[PointSet, Sequence[Point]],
    b: Union[PointSet, Sequence[Point]],
    context: Optional[KernelContext] = None,
    validate: bool = True,
) -> np.ndarray:
    if not isinstance(a, PointSet):
        a = PointSet.from_points(a)
    if not isinstance(b, PointSet):
        b = PointSet.from_points(b)
    if a.dim != b.dim:
        raise InputError(f"Dimension mismatch: {a.dim} vs {b.dim}")
    if validate:
        spec.validate_theta(theta)
    context = context or KernelContext()
    block = evaluate_node(spec.root, theta, a, b, context)
    if not np.all(np.isfinite(block)):
        raise HyperparameterError("kernel evaluation produced non-finite values")
    return block


def eval_kernel(
    spec: KernelSpec,
    theta: Mapping[str, float],
    x_i: Point,
    x_j: Point,
    context: Optional[KernelContext] = None,
) -> float:
    return float(gram_block(spec, theta, [x_i], [x_j], context)[0, 0])


def gram_diagonal(
    spec: KernelSpec,
    theta: Mapping[str, float],
    points: PointSet,
    context: Optional[KernelContext] = None,
) -> np.ndarray:
    """k(x, x) for every point, one 1x1 block at a time."""
    context = context or KernelContext()
    out = np.empty(len(points))
    for i in range(len(points)):
        single = points.take(i, i + 1)
        out[i] = gram_block(spec, theta, single, single, context, validate=False)[0, 0]
    return out


def evaluate_node(
    node: KernelNode,
    theta: Mapping[str, float],
    a: PointSet,
    b: PointSet,
    context: KernelContext,
) -> np.ndarray:
    match node:
        case Wendland(r0=r0, form=form):
            return wendland_values(pairwise_distance(a.coords, b.coords, context.metric), resolve(r0, theta), form)
        case Matern32(length_scale=length, sigma=sigma):
            return matern32_values(
                pairwise_distance(a.coords, b.coords, context.metric),
                resolve(length, theta),
                resolve(sigma, theta),
            )
        case NonstatWendland(signal=signal, length=length, r0=r0, form=form):
            prefactor, root_q = convolution_terms(
                a.coords,
                b.coords,
                length_diagonals(length, a.coords, theta),
                length_diagonals(length, b.coords, theta),
            )
            sigma = np.outer(signal.evaluate(a.coords, theta), signal.evaluate(b.coords, theta))
            return sigma * prefactor * wendland_values(root_q, resolve(r0, theta), form)
        case NonstatMatern(signal=signal, length=length):
            prefactor, root_q = convolution_terms(
                a.coords,
                b.coords,
                length_diagonals(length, a.coords, theta),
                length_diagonals(length, b.coords, theta),
            )
            sigma = np.outer(signal.evaluate(a.coords, theta), signal.evaluate(b.coords, theta))
            return sigma * prefactor * matern32_values(root_q, 1.0, 1.0)
        case BumpFarfield(groups=groups):
            return outer_sum(
                bump_group_values(a.coords, groups, theta),
                bump_group_values(b.coords, groups, theta),
            )
        case DeltaFarfield():
            return _delta_block(node, theta, a, b, context)
        case SplitFarfield():
            return _split_block(node, theta, a, b, context)
        case Product(children=children):
            out = np.ones((len(a), len(b)))
            for child in children:
                out = out * evaluate_node(child, theta, a, b, context)
            return out
        case Sum(children=children):
            out = np.zeros((len(a), len(b)))
            for child in children:
                out = out + evaluate_node(child, theta, a, b, context)
            return out
        case Scale(c=c, child=child):
            factor = resolve(c, theta)
            if not factor > 0:
                raise HyperparameterError(f"scale constant must be positive, got {factor}")
            return factor * evaluate_node(child, theta, a, b, context)
    raise InputError(f"Unknown kernel node: {type(node).__name__}")


def _split_block(
    node: SplitFarfield,
    theta: Mapping[str, float],
    a: PointSet,
    b: PointSet,
    context: KernelContext,
) -> np.ndarray:
    sigma = np.outer(node.signal.evaluate(a.coords, theta), node.signal.evaluate(b.coords, theta))
    pref_sigma, root_q = convolution_terms(
        a.coords,
        b.coords,
        length_diagonals(node.sigma_length, a.coords, theta),
        length_diagonals(node.sigma_length, b.coords, theta),
    )
    pref_phi, root_p = convolution_terms(
        a.coords,
        b.coords,
        length_diagonals(node.phi_length, a.coords, theta),
        length_diagonals(node.phi_length, b.coords, theta),
    )
    local = pref_sigma * wendland_values(root_q, resolve(node.r0, theta), node.form)
    far = pref_phi * matern32_values(root_p, 1.0, 1.0) * evaluate_node(node.farfield, theta, a, b, context)
    return 0.5 * sigma * (local + far)


def _delta_incidence(
    node: DeltaFarfield,
    theta: Mapping[str, float],
    points: PointSet,
    context: KernelContext,
) -> sparse.csr_matrix:
    """Membership matrix: row i marks the groups p that contain point i."""
    n = len(points)
    if points.indices is None:
        width = len(node.groups) if node.radius is None else len(context.anchors or ())
        return sparse.csr_matrix((n, max(width, 1)))

    if node.radius is None:
        rows: list[int] = []
        cols: list[int] = []
        lookup = {int(index): position for position, index in enumerate(points.indices)}
        for p, group in enumerate(node.groups):
            for member in sorted(group.members):
                position = lookup.get(member)
                if position is not None:
                    rows.append(position)
                    cols.append(p)
        data = np.ones(len(rows))
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, len(node.groups)))

    radius = resolve(node.radius, theta)
    if radius < 0:
        raise HyperparameterError(f"delta radius must be nonnegative, got {radius}")
    anchors = context.anchors
    if anchors is None:
        raise InputError("radius-rule delta groups need a bound anchor dataset")
    if np.any(points.indices < 0) or np.any(points.indices >= len(anchors)):
        raise InputError("delta point index outside the bound dataset")
    tree = context.anchor_tree
    p_norm = 1 if context.metric.tag == MetricTag.L1 else 2
    located = context.metric.scale(anchors.coords[points.indices])
    neighbours = tree.query_ball_point(located, r=radius, p=p_norm)
    rows = [i for i, hits in enumerate(neighbours) for _ in hits]
    cols = [p for hits in neighbours for p in sorted(hits)]
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, len(anchors)))


def _delta_block(
    node: DeltaFarfield,
    theta: Mapping[str, float],
    a: PointSet,
    b: PointSet,
    context: KernelContext,
) -> np.ndarray:
    incidence_a = _delta_incidence(node, theta, a, context)
    incidence_b = _delta_incidence(node, theta, b, context)
    return np.asarray((incidence_a @ incidence_b.T).toarray(), dtype=float)
