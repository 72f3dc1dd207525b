"""Block-parallel covariance assembly."""

from sparse_gp.assembly.engine import (
    DEFAULT_BLOCK_SIZE,
    assemble,
    compute_block,
    cross_covariance,
    partition,
    plan_assembly,
)
from sparse_gp.assembly.models import AssemblyPlan, AssemblyReport, BlockRange

__all__ = [
    "AssemblyPlan",
    "AssemblyReport",
    "BlockRange",
    "DEFAULT_BLOCK_SIZE",
    "assemble",
    "compute_block",
    "cross_covariance",
    "partition",
    "plan_assembly",
]
