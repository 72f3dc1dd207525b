"""Sparse symmetric storage, solvers and the dense oracle."""

from sparse_gp.linalg.dense import DENSE_LIMIT, dense_cholesky, dense_logdet, dense_solve
from sparse_gp.linalg.models import CompressedRowMatrix, LogdetReport, SolveReport, TripletMatrix
from sparse_gp.linalg.solvers import minres, sparse_logdet
from sparse_gp.linalg.sparse import add_diagonal, merge, sparsify_block, spmv, to_csr, write_matrix_market

__all__ = [
    "CompressedRowMatrix",
    "DENSE_LIMIT",
    "LogdetReport",
    "SolveReport",
    "TripletMatrix",
    "add_diagonal",
    "dense_cholesky",
    "dense_logdet",
    "dense_solve",
    "merge",
    "minres",
    "sparse_logdet",
    "sparsify_block",
    "spmv",
    "to_csr",
    "write_matrix_market",
]
