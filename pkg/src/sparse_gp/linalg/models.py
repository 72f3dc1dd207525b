"""Sparse matrix storage and solver reports."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional

import numpy as np
from scipy import sparse

from sparse_gp.errors import InputError


@dataclass(frozen=True, eq=False)
class TripletMatrix:
    """Coordinate-format build/transport matrix; ``block`` tags assembly fragments."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    block: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise InputError("triplet arrays must be one-dimensional and equally long")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= self.n or cols.max() >= self.n):
            raise InputError(f"triplet coordinate outside [0, {self.n})")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)

    @classmethod
    def empty(cls, n: int, block: Optional[tuple[int, int]] = None) -> "TripletMatrix":
        return cls(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), block)

    @classmethod
    def from_entries(cls, n: int, entries: list[tuple[int, int, float]]) -> "TripletMatrix":
        if not entries:
            return cls.empty(n)
        rows, cols, values = zip(*entries)
        return cls(n, np.array(rows), np.array(cols), np.array(values, dtype=float))

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def entries(self) -> Iterator[tuple[int, int, float]]:
        for r, c, v in zip(self.rows, self.cols, self.values):
            yield int(r), int(c), float(v)

    def sorted(self) -> "TripletMatrix":
        order = np.lexsort((self.cols, self.rows))
        return TripletMatrix(self.n, self.rows[order], self.cols[order], self.values[order], self.block)


@dataclass(frozen=True, eq=False)
class CompressedRowMatrix:
    n: int
    offsets: np.ndarray
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        offsets = np.asarray(self.offsets, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if offsets.shape != (self.n + 1,) or offsets[0] != 0 or np.any(np.diff(offsets) < 0):
            raise InputError("row offsets must have length n+1, start at 0 and be nondecreasing")
        if offsets[-1] != indices.size or indices.size != values.size:
            raise InputError("row offsets do not match the stored entries")
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def density(self) -> float:
        return self.nnz / float(self.n * self.n) if self.n else 0.0

    @cached_property
    def scipy(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.values, self.indices, self.offsets), shape=(self.n, self.n))

    def to_scipy(self) -> sparse.csr_matrix:
        return self.scipy

    def to_dense(self) -> np.ndarray:
        return self.scipy.toarray()

    def diagonal(self) -> np.ndarray:
        return self.scipy.diagonal()

    def to_triplets(self) -> TripletMatrix:
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.offsets))
        return TripletMatrix(self.n, rows, self.indices.copy(), self.values.copy())

    def is_symmetric(self) -> bool:
        mirror = self.scipy.T.tocsr()
        mirror.sort_indices()
        return (
            np.array_equal(mirror.indptr, self.offsets)
            and np.array_equal(mirror.indices, self.indices)
            and np.array_equal(mirror.data, self.values)
        )

    def digest(self) -> str:
        hasher = hashlib.sha256()
        hasher.update(np.int64(self.n).tobytes())
        for array in (self.offsets, self.indices, self.values):
            hasher.update(np.ascontiguousarray(array).tobytes())
        return hasher.hexdigest()


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    tolerance: float
    jitter: float = 0.0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "jitter": self.jitter,
        }


@dataclass(frozen=True)
class LogdetReport:
    value: float
    method: str
    ordering: str
    jitter: float = 0.0
    attempts: int = 1

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "ordering": self.ordering,
            "jitter": self.jitter,
            "attempts": self.attempts,
        }
