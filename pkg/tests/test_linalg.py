import math

import numpy as np
import pytest
from scipy import sparse

from sparse_gp.errors import AssemblyError, DefinitenessError, InputError
from sparse_gp.linalg import (
    DENSE_LIMIT,
    TripletMatrix,
    add_diagonal,
    dense_cholesky,
    dense_logdet,
    dense_solve,
    merge,
    minres,
    sparse_logdet,
    sparsify_block,
    spmv,
    to_csr,
    write_matrix_market,
)
from sparse_gp.linalg.solvers import jitter_schedule


def _random_sparse_spd(n: int, density: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = sparse.random(n, n, density=density, random_state=rng, data_rvs=lambda k: rng.uniform(-1, 1, k)).toarray()
    sym = a + a.T
    return sym + (np.abs(sym).sum(axis=1).max() + 1.0) * np.eye(n)


def _csr_from_dense(a: np.ndarray):
    rows, cols = np.nonzero(a)
    return to_csr(TripletMatrix(a.shape[0], rows, cols, a[rows, cols]))


def test_sparsify_block_examples():
    assert sparsify_block(np.zeros((3, 3)), 0, 0).nnz == 0
    identity = sparsify_block(np.eye(2), 0, 0)
    assert sorted(identity.entries()) == [(0, 0, 1.0), (1, 1, 1.0)]
    off = sparsify_block(np.array([[0.0, 0.061], [0.061, 0.0]]), 0, 0)
    assert sorted(off.entries()) == [(0, 1, 0.061), (1, 0, 0.061)]


def test_sparsify_block_applies_offsets_and_drop_tolerance():
    block = np.array([[0.5, 1e-12], [0.0, 2.0]])
    fragment = sparsify_block(block, 4, 6, drop_tol=1e-9, n=10)
    assert sorted(fragment.entries()) == [(4, 6, 0.5), (5, 7, 2.0)]
    with pytest.raises(InputError):
        sparsify_block(block, -1, 0)


def test_merge_mirrors_off_diagonal_entries():
    upper = TripletMatrix.from_entries(3, [(0, 0, 1.0), (0, 2, 0.3)])
    merged = merge([upper], 3)
    assert sorted(merged.entries()) == [(0, 0, 1.0), (0, 2, 0.3), (2, 0, 0.3)]


def test_to_csr_examples():
    empty = to_csr(TripletMatrix.empty(3))
    assert empty.offsets.tolist() == [0, 0, 0, 0]
    diag = to_csr(TripletMatrix.from_entries(2, [(1, 1, 3.0), (0, 0, 2.0)]))
    assert diag.offsets.tolist() == [0, 1, 2]
    assert diag.to_dense().tolist() == [[2.0, 0.0], [0.0, 3.0]]


def test_to_csr_rejects_duplicate_coordinates():
    with pytest.raises(AssemblyError):
        to_csr(TripletMatrix.from_entries(2, [(0, 1, 1.0), (0, 1, 1.0)]))


def test_triplet_round_trip_on_random_pattern():
    a = _random_sparse_spd(50, 0.05, seed=1)
    csr = _csr_from_dense(a)
    assert csr.is_symmetric()
    back = csr.to_triplets()
    expected = TripletMatrix(50, *np.nonzero(a), a[np.nonzero(a)]).sorted()
    assert np.array_equal(back.rows, expected.rows)
    assert np.array_equal(back.cols, expected.cols)
    assert np.array_equal(back.values, expected.values)


def test_triplet_coordinates_are_checked():
    with pytest.raises(InputError):
        TripletMatrix.from_entries(2, [(0, 2, 1.0)])


def test_add_diagonal_fills_missing_entries():
    t = TripletMatrix.from_entries(3, [(0, 0, 1.0), (0, 1, 0.2), (1, 0, 0.2)])
    csr = to_csr(add_diagonal(t, np.array([0.5, 0.25, 0.0])))
    assert csr.to_dense().tolist() == [[1.5, 0.2, 0.0], [0.2, 0.25, 0.0], [0.0, 0.0, 0.0]]


def test_spmv_examples():
    identity = to_csr(TripletMatrix.from_entries(3, [(i, i, 1.0) for i in range(3)]))
    x = np.array([1.0, -2.0, 0.5])
    assert spmv(identity, x).tolist() == x.tolist()
    assert spmv(to_csr(TripletMatrix.empty(3)), x).tolist() == [0.0, 0.0, 0.0]
    with pytest.raises(InputError):
        spmv(identity, np.ones(2))


def test_minres_examples():
    identity = _csr_from_dense(np.eye(4))
    b = np.array([1.0, 2.0, -3.0, 0.5])
    x, report = minres(identity, b)
    assert np.allclose(x, b)
    assert report.converged
    assert report.iterations <= 1

    x, report = minres(_csr_from_dense(np.diag([2.0, 4.0])), np.array([2.0, 4.0]))
    assert np.allclose(x, [1.0, 1.0])


def test_minres_zero_rhs_returns_zero():
    x, report = minres(_csr_from_dense(np.eye(3)), np.zeros(3))
    assert x.tolist() == [0.0, 0.0, 0.0]
    assert report.iterations == 0
    assert report.converged


def test_minres_matches_dense_solve():
    a = _random_sparse_spd(200, 0.02, seed=4)
    b = np.random.default_rng(5).normal(size=200)
    x, report = minres(_csr_from_dense(a), b, tol=1e-10)
    assert report.converged
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) <= 1e-10
    assert np.allclose(x, np.linalg.solve(a, b), rtol=1e-7, atol=1e-9)


def test_minres_reports_non_convergence():
    a = _random_sparse_spd(100, 0.05, seed=6)
    b = np.ones(100)
    _, report = minres(_csr_from_dense(a), b, tol=1e-14, maxiter=1, restarts=0)
    assert not report.converged
    assert report.residual > 1e-14


def test_minres_reaches_tight_tolerance_on_poorly_scaled_system():
    base = _random_sparse_spd(200, 0.03, seed=21)
    scale = np.logspace(-1.0, 1.0, 200)
    a = scale[:, None] * base * scale[None, :]
    b = np.random.default_rng(22).normal(size=200)
    x, report = minres(_csr_from_dense(a), b, tol=1e-10)
    assert report.converged
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) <= 1e-10


def test_sparse_logdet_examples():
    assert sparse_logdet(sparse.identity(5, format="csr"), method="splu").value == pytest.approx(0.0, abs=1e-14)
    report = sparse_logdet(np.diag([2.0, 3.0]), method="splu")
    assert report.value == pytest.approx(math.log(6.0), rel=1e-12)
    assert report.jitter == 0.0
    assert report.attempts == 1


@pytest.mark.parametrize("ordering", ["MMD_AT_PLUS_A", "COLAMD", "NATURAL"])
def test_sparse_logdet_matches_dense(ordering):
    a = _random_sparse_spd(150, 0.03, seed=9)
    report = sparse_logdet(_csr_from_dense(a), method="splu", ordering=ordering)
    assert report.value == pytest.approx(np.linalg.slogdet(a)[1], rel=1e-10)


def test_sparse_logdet_orderings_agree():
    a = _csr_from_dense(_random_sparse_spd(150, 0.03, seed=10))
    first = sparse_logdet(a, method="splu", ordering="MMD_AT_PLUS_A")
    second = sparse_logdet(a, method="splu", ordering="COLAMD")
    assert first.ordering != second.ordering
    assert first.value == pytest.approx(second.value, rel=1e-10)


def test_sparse_logdet_matches_cholmod_when_available():
    pytest.importorskip("sksparse.cholmod")
    a = _random_sparse_spd(120, 0.04, seed=12)
    report = sparse_logdet(_csr_from_dense(a), method="cholmod")
    assert report.value == pytest.approx(np.linalg.slogdet(a)[1], rel=1e-10)


def test_sparse_logdet_applies_jitter_to_singular_input():
    report = sparse_logdet(np.array([[1.0, 1.0], [1.0, 1.0]]), method="splu")
    assert report.jitter == pytest.approx(1e-10)
    assert report.attempts == 2
    assert report.value == pytest.approx(math.log(2e-10), abs=1e-3)


def test_sparse_logdet_rejects_indefinite_input():
    with pytest.raises(DefinitenessError):
        sparse_logdet(np.diag([1.0, -1.0]), method="splu")


def test_sparse_logdet_rejects_indefinite_input_with_positive_determinant():
    swaps = np.array([[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]])
    assert np.linalg.det(swaps) == pytest.approx(1.0)
    with pytest.raises(DefinitenessError):
        sparse_logdet(swaps, method="splu")
    with pytest.raises(DefinitenessError):
        sparse_logdet(np.diag([-1.0, -1.0, 3.0, 3.0]), method="splu")


def test_jitter_schedule_spans_six_decades():
    schedule = jitter_schedule(2.0)
    assert len(schedule) == 7
    assert schedule[0] == pytest.approx(2e-10)
    assert schedule[-1] == pytest.approx(2e-4)


def test_sparse_logdet_rejects_unknown_ordering():
    with pytest.raises(InputError):
        sparse_logdet(np.eye(2), method="splu", ordering="RANDOM")


def test_dense_oracle():
    b = np.array([1.0, 2.0])
    assert np.allclose(dense_solve(np.eye(2), b), b)
    assert dense_logdet(np.array([[4.0]])) == pytest.approx(math.log(4.0))
    a = _random_sparse_spd(30, 0.2, seed=2)
    factor = dense_cholesky(a)
    assert dense_logdet(factor) == pytest.approx(np.linalg.slogdet(a)[1], rel=1e-12)


def test_dense_oracle_rejects_indefinite_and_oversized_input():
    with pytest.raises(DefinitenessError):
        dense_cholesky(np.diag([1.0, -1.0]))
    with pytest.raises(InputError):
        dense_cholesky(np.broadcast_to(0.0, (DENSE_LIMIT + 1, DENSE_LIMIT + 1)))


def test_matrix_market_output(tmp_path):
    csr = to_csr(TripletMatrix.from_entries(2, [(0, 0, 2.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 3.0)]))
    path = write_matrix_market(tmp_path / "k.mtx", csr)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real symmetric"
    assert lines[1] == "2 2 3"
    assert lines[2:] == ["1 1 2", "2 1 0.5", "2 2 3"]


def test_solver_suite_on_random_spd_matrices():
    rng = np.random.default_rng(21)
    for seed in range(50):
        n = int(rng.integers(5, 201))
        a = _random_sparse_spd(n, 0.05, seed=100 + seed)
        csr = _csr_from_dense(a)
        b = rng.normal(size=n)
        x, report = minres(csr, b, tol=1e-12)
        assert report.converged
        np.testing.assert_allclose(x, np.linalg.solve(a, b), rtol=1e-6, atol=1e-10)
        assert sparse_logdet(csr, method="splu").value == pytest.approx(np.linalg.slogdet(a)[1], rel=1e-6)
