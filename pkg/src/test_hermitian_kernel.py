# src/test_hermitian_kernel.py
import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy.linalg import lu

from .errors import DimensionMismatch, NotHermitian, NotPositiveSemidefinite, SingularGram
from .hermitian_kernel import (
    HermitianGram,
    conj_transpose,
    det_from_pivots,
    gram_scale,
    ldl_semidefinite,
    log_det_from_pivots,
    matmul,
    solve_psd,
    solve_unit_lower,
)
from .strategies import complex_normal, random_psd, seeds


# ---------- matmul / conj_transpose ----------
def test_matmul_identity_and_imaginary_unit():
    m = np.array([[1 + 2j, 3], [0, -1j]])
    assert_array_equal(matmul(np.eye(2), m), m)
    assert_array_equal(matmul(np.array([[1j]]), np.array([[1j]])), np.array([[-1 + 0j]]))


@given(seeds)
def test_matmul_matches_naive_loop(seed):
    rng = np.random.default_rng(seed)
    a, b = complex_normal(rng, (3, 3)), complex_normal(rng, (3, 3))
    naive = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                naive[i, j] += a[i, k] * b[k, j]
    assert_allclose(matmul(a, b), naive, rtol=0, atol=1e-13)


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


@given(seeds)
def test_conj_transpose_involution_and_linearity(seed):
    rng = np.random.default_rng(seed)
    a, b = complex_normal(rng, (3, 4)), complex_normal(rng, (3, 4))
    c = complex(*rng.standard_normal(2))
    assert_array_equal(conj_transpose(conj_transpose(a)), a)
    assert_allclose(conj_transpose(a + c * b), conj_transpose(a) + np.conj(c) * conj_transpose(b), atol=1e-14)


def test_conj_transpose_scalar_and_hermitian():
    assert_array_equal(conj_transpose(np.array([[1 + 2j]])), np.array([[1 - 2j]]))
    h = np.array([[2, 1 - 1j], [1 + 1j, 3]])
    assert_array_equal(conj_transpose(h), h)


# ---------- HermitianGram ----------
def test_gram_symmetrizes_small_asymmetry():
    g = HermitianGram(np.array([[2, 1 + 1e-12], [1, 2 + 1e-13j]]))
    assert g.matrix[0, 1] == np.conj(g.matrix[1, 0])
    assert g.matrix[1, 1].imag == 0.0
    assert not g.matrix.flags.writeable


def test_gram_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        HermitianGram(np.array([[1, 2], [0, 1]]))


def test_gram_rejects_nan():
    with pytest.raises(ValueError):
        HermitianGram(np.array([[np.nan]]))


def test_gram_rejects_indefinite():
    with pytest.raises(NotPositiveSemidefinite):
        HermitianGram(np.array([[1, 2], [2, 1]]))
    # zero pivot with a nonzero coupling column
    with pytest.raises(NotPositiveSemidefinite):
        HermitianGram(np.array([[0, 1], [1, 0]]))


# ---------- ldl_semidefinite ----------
def test_ldl_identity():
    f = ldl_semidefinite(HermitianGram.identity(4))
    assert_array_equal(f.L, np.eye(4))
    assert_array_equal(f.d2, np.ones(4))
    assert f.rank == 4


def test_ldl_two_by_two():
    f = ldl_semidefinite(HermitianGram(np.array([[2, 1], [1, 2]])))
    assert_allclose(f.L, [[1, 0], [0.5, 1]], atol=0)
    assert_allclose(f.d2, [2, 1.5], atol=1e-15)
    assert f.rank == 2
    assert det_from_pivots(f) == pytest.approx(3.0, rel=1e-15)


def test_ldl_duplicated_variable():
    f = ldl_semidefinite(HermitianGram(np.array([[1, 1], [1, 1]])))
    assert_array_equal(f.d2, [1, 0])
    assert f.rank == 1
    assert det_from_pivots(f) == 0.0
    assert log_det_from_pivots(f) == -np.inf


def test_ldl_zero_variable_leaves_column_empty():
    f = ldl_semidefinite(HermitianGram(np.array([[0, 0], [0, 1]])))
    assert_array_equal(f.d2, [0, 1])
    assert_array_equal(f.L, np.eye(2))
    assert f.rank == 1


@given(seeds, st.integers(1, 8))
def test_ldl_reconstructs_and_is_monic(seed, dim):
    rng = np.random.default_rng(seed)
    g = HermitianGram(random_psd(rng, dim) * rng.uniform(0.1, 10.0))
    f = ldl_semidefinite(g)
    assert np.all(np.diag(f.L) == 1 + 0j)
    assert_array_equal(np.triu(f.L, 1), 0)
    assert np.max(np.abs(f.reconstruct() - g.matrix)) <= 1e-10 * gram_scale(g)
    assert f.rank == dim


@given(seeds, st.integers(1, 8))
def test_det_matches_lu_oracle(seed, dim):
    rng = np.random.default_rng(seed)
    m = random_psd(rng, dim)
    p, l, u = lu(m)
    oracle = (np.linalg.det(p) * np.prod(np.diag(u))).real
    assert det_from_pivots(ldl_semidefinite(HermitianGram(m))) == pytest.approx(oracle, rel=1e-9)


# ---------- solves ----------
def test_solve_unit_lower_examples():
    b = np.array([[2.0], [2.0]])
    assert_array_equal(solve_unit_lower(np.eye(2), b), b)
    assert_allclose(solve_unit_lower(np.array([[1, 0], [0.5, 1]]), b), [[2], [1]], atol=0)


@given(seeds, st.integers(1, 8))
def test_solve_unit_lower_residual(seed, dim):
    rng = np.random.default_rng(seed)
    l = np.tril(complex_normal(rng, (dim, dim)) * 0.3, -1) + np.eye(dim)
    b = complex_normal(rng, (dim, 2))
    x = solve_unit_lower(l, b)
    assert np.linalg.norm(l @ x - b) <= 1e-12 * np.linalg.norm(b)


def test_solve_psd_examples():
    b = np.array([3.0, 3.0])
    assert_array_equal(solve_psd(HermitianGram.identity(2), b), b)
    assert_allclose(solve_psd(HermitianGram(np.array([[2, 1], [1, 2]])), b), [1, 1], atol=1e-15)


def test_solve_psd_singular_names_matrix():
    with pytest.raises(SingularGram) as exc:
        solve_psd(HermitianGram(np.ones((2, 2))), np.ones(2), which="R_yy")
    assert exc.value.which == "R_yy"


def test_solve_psd_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_psd(HermitianGram.identity(2), np.ones(3))


# ---------- derived Grams ----------
def test_derived_gram_absorbs_negative_round_off():
    # last pivot is -1e-14: far below -tol for dim 2, far above -slack * tol
    m = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-14]])
    with pytest.raises(NotPositiveSemidefinite):
        HermitianGram(m)
    f = ldl_semidefinite(HermitianGram.derived(m))
    assert_array_equal(f.d2, [1, 0])
    assert f.rank == 1


def test_derived_gram_still_rejects_indefinite():
    with pytest.raises(NotPositiveSemidefinite):
        HermitianGram.derived(np.array([[1, 2], [2, 1]]))


def test_derived_gram_keeps_small_positive_pivots():
    g = HermitianGram.derived(np.diag([1.0, 1e-12]))
    assert g.innovations.rank == 2


def test_principal_submatrix_is_derived():
    g = HermitianGram(random_psd(np.random.default_rng(3), 4))
    sub = g.principal([2, 0])
    assert sub.slack == HermitianGram.derived(np.eye(1)).slack
    assert sub.scale == g.scale
