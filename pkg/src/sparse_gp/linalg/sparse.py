"""Triplet fragments, merging, CSR conversion and Matrix Market output."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from sparse_gp.errors import AssemblyError, InputError
from sparse_gp.linalg.models import CompressedRowMatrix, TripletMatrix


def sparsify_block(
    block: np.ndarray,
    row_offset: int,
    col_offset: int,
    drop_tol: float = 0.0,
    n: Optional[int] = None,
    tag: Optional[tuple[int, int]] = None,
) -> TripletMatrix:
    if row_offset < 0 or col_offset < 0:
        raise InputError("block offsets must be nonnegative")
    if drop_tol < 0:
        raise InputError("drop tolerance must be nonnegative")
    block = np.asarray(block, dtype=float)
    if n is None:
        n = max(row_offset + block.shape[0], col_offset + block.shape[1])
    keep = block != 0.0
    if drop_tol > 0:
        keep &= np.abs(block) > drop_tol
    local_rows, local_cols = np.nonzero(keep)
    return TripletMatrix(
        n=n,
        rows=local_rows + row_offset,
        cols=local_cols + col_offset,
        values=block[local_rows, local_cols],
        block=tag,
    )


def merge(fragments: Iterable[TripletMatrix], n: int, mirror: bool = True) -> TripletMatrix:
    """Concatenate fragments in block order, adding (j, i) for each off-diagonal (i, j)."""
    ordered = sorted(fragments, key=lambda item: item.block if item.block is not None else (n, n))
    rows, cols, values = [], [], []
    for fragment in ordered:
        if fragment.n != n:
            raise AssemblyError(f"fragment dimension {fragment.n} does not match {n}", fragment.block)
        rows.append(fragment.rows)
        cols.append(fragment.cols)
        values.append(fragment.values)
        if mirror:
            off = fragment.rows != fragment.cols
            rows.append(fragment.cols[off])
            cols.append(fragment.rows[off])
            values.append(fragment.values[off])
    if not rows:
        return TripletMatrix.empty(n)
    return TripletMatrix(n, np.concatenate(rows), np.concatenate(cols), np.concatenate(values))


def add_diagonal(t: TripletMatrix, diagonal: np.ndarray) -> TripletMatrix:
    """Add ``diagonal`` onto existing diagonal entries, emitting the missing nonzero ones."""
    diagonal = np.asarray(diagonal, dtype=float)
    if diagonal.shape != (t.n,):
        raise InputError(f"diagonal has length {diagonal.shape[0]} for dimension {t.n}")
    values = t.values.copy()
    on_diag = t.rows == t.cols
    values[on_diag] = values[on_diag] + diagonal[t.rows[on_diag]]
    present = np.zeros(t.n, dtype=bool)
    present[t.rows[on_diag]] = True
    missing = np.flatnonzero(~present & (diagonal != 0.0))
    return TripletMatrix(
        t.n,
        np.concatenate([t.rows, missing]),
        np.concatenate([t.cols, missing]),
        np.concatenate([values, diagonal[missing]]),
    )


def to_csr(t: TripletMatrix) -> CompressedRowMatrix:
    order = np.lexsort((t.cols, t.rows))
    rows = t.rows[order]
    cols = t.cols[order]
    values = t.values[order]
    if rows.size > 1:
        repeated = (np.diff(rows) == 0) & (np.diff(cols) == 0)
        if np.any(repeated):
            first = int(np.flatnonzero(repeated)[0])
            raise AssemblyError(f"duplicate coordinate ({rows[first]}, {cols[first]}) after merge")
    counts = np.bincount(rows, minlength=t.n)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return CompressedRowMatrix(t.n, offsets, cols, values)


def spmv(a: CompressedRowMatrix, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != a.n:
        raise InputError(f"vector length {x.shape[0]} does not match matrix dimension {a.n}")
    return a.to_scipy() @ x


def write_matrix_market(path: str | Path, a: CompressedRowMatrix) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    triplets = a.to_triplets()
    lower = triplets.rows >= triplets.cols
    rows = triplets.rows[lower]
    cols = triplets.cols[lower]
    values = triplets.values[lower]
    with path.open("w", encoding="utf-8") as handle:
        handle.write("%%MatrixMarket matrix coordinate real symmetric\n")
        handle.write(f"{a.n} {a.n} {rows.size}\n")
        for r, c, v in zip(rows, cols, values):
            handle.write(f"{r + 1} {c + 1} {v:.17g}\n")
    return path
