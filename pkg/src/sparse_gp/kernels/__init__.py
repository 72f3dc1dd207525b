"""Kernel definitions and evaluation."""

from sparse_gp.kernels.engine import KernelContext, eval_kernel, evaluate_node, gram_block, gram_diagonal
from sparse_gp.kernels.functions import (
    bump_eval,
    bump_farfield,
    delta_farfield,
    distance,
    matern32,
    nonstat_wendland,
    wendland,
)
from sparse_gp.kernels.models import (
    BumpFarfield,
    BumpFunction,
    BumpGroup,
    DeltaFarfield,
    DeltaGroup,
    DistanceMetric,
    FieldKind,
    FieldRole,
    HyperparameterSlot,
    KernelNode,
    KernelSpec,
    Matern32,
    MetricTag,
    NonstatMatern,
    NonstatWendland,
    ParametricField,
    Point,
    PointSet,
    Product,
    Scale,
    SlotRole,
    SplitFarfield,
    Sum,
    Wendland,
    WendlandForm,
)
from sparse_gp.kernels.presets import PRESETS, build_preset
from sparse_gp.kernels.serialization import dumps, loads, spec_from_dict, spec_to_dict

__all__ = [
    "BumpFarfield",
    "BumpFunction",
    "BumpGroup",
    "DeltaFarfield",
    "DeltaGroup",
    "DistanceMetric",
    "FieldKind",
    "FieldRole",
    "HyperparameterSlot",
    "KernelContext",
    "KernelNode",
    "KernelSpec",
    "Matern32",
    "MetricTag",
    "NonstatMatern",
    "NonstatWendland",
    "PRESETS",
    "ParametricField",
    "Point",
    "PointSet",
    "Product",
    "Scale",
    "SlotRole",
    "SplitFarfield",
    "Sum",
    "Wendland",
    "WendlandForm",
    "build_preset",
    "bump_eval",
    "bump_farfield",
    "delta_farfield",
    "distance",
    "dumps",
    "eval_kernel",
    "evaluate_node",
    "gram_block",
    "gram_diagonal",
    "loads",
    "matern32",
    "nonstat_wendland",
    "spec_from_dict",
    "spec_to_dict",
    "wendland",
]
