"""Assembly plans and reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from sparse_gp.errors import InputError


@dataclass(frozen=True, order=True)
class BlockRange:
    start: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise InputError(f"Invalid block range: [{self.start}, {self.end})")

    @property
    def size(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class AssemblyPlan:
    n: int
    block_size: int
    ranges: tuple[BlockRange, ...]
    pairs: tuple[tuple[int, int], ...]
    workers: int = 1
    retries: int = 1

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise InputError(f"Invalid workers: {self.workers}")
        if any(a > b for a, b in self.pairs):
            raise InputError("block pairs must satisfy a <= b")


@dataclass(frozen=True)
class AssemblyReport:
    n: int
    block_size: int
    workers: int
    nnz: int
    density: float
    t_covariance_s: float
    t_merge_s: float
    t_csr_s: float
    blocks: int = 0
    retried: int = 0

    def to_json(self) -> dict:
        return asdict(self)
