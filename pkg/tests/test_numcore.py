import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from riskscope.exceptions import ShapeError, SingularMatrixError
from riskscope.numcore import (
    as_matrix,
    cholesky,
    matmul,
    pairwise_sq_dist,
    solve_spd,
    sym_eigen,
)


def triple_loop(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def test_matmul_identity_and_hand_case():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matmul(np.eye(2), a), a)
    assert np.array_equal(matmul(a, [[1.0], [1.0]]), [[3.0], [7.0]])


def test_matmul_matches_triple_loop(rng):
    a, b = rng.normal(size=(5, 4)), rng.normal(size=(4, 3))
    np.testing.assert_allclose(matmul(a, b), triple_loop(a, b), atol=1e-12, rtol=0)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_matmul_associative(seed):
    r = np.random.default_rng(seed)
    a, b, c = r.normal(size=(3, 4)), r.normal(size=(4, 5)), r.normal(size=(5, 2))
    left = matmul(matmul(a, b), c)
    right = matmul(a, matmul(b, c))
    assert np.linalg.norm(left - right) <= 1e-9 * max(1.0, np.linalg.norm(left))


def test_solve_spd_trivial():
    b = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(solve_spd(np.eye(3), b), b)
    np.testing.assert_allclose(solve_spd([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0]), [1.0, 2.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_solve_spd_residual(seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(6, 6))
    a = m @ m.T + 6 * np.eye(6)
    b = r.normal(size=6)
    x = solve_spd(a, b)
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-9


def test_solve_spd_rejects_indefinite():
    with pytest.raises(SingularMatrixError):
        solve_spd([[1.0, 0.0], [0.0, -1.0]], [1.0, 1.0])
    with pytest.raises(SingularMatrixError):
        solve_spd([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])


def test_cholesky_reconstructs(rng):
    m = rng.normal(size=(5, 5))
    a = m @ m.T + np.eye(5)
    L = cholesky(a)
    np.testing.assert_allclose(L @ L.T, a, atol=1e-12)
    assert np.allclose(np.triu(L, 1), 0.0)


def test_sym_eigen_diagonal_and_identity():
    vals, vecs = sym_eigen(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(vals, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(vecs[:, 0]), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(np.abs(vecs[:, 1]), [0.0, 1.0], atol=1e-15)
    vals, vecs = sym_eigen(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(vals, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(vecs[:, 0]), [0.0, 1.0], atol=1e-15)
    vals, _ = sym_eigen(np.eye(4))
    np.testing.assert_allclose(vals, np.ones(4))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 9))
def test_sym_eigen_defining_equation_and_orthonormality(seed, n):
    r = np.random.default_rng(seed)
    m = r.normal(size=(n, n))
    a = (m + m.T) / 2
    vals, vecs = sym_eigen(a)
    for lam, v in zip(vals, vecs.T):
        assert np.max(np.abs(a @ v - lam * v)) < 1e-8
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(n), atol=1e-8)
    assert np.all(np.diff(vals) <= 0)
    np.testing.assert_allclose(vals, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-10)


def test_sym_eigen_top_k(rng):
    m = rng.normal(size=(5, 5))
    a = m + m.T
    vals, vecs = sym_eigen(a, top_k=2)
    assert vals.shape == (2,) and vecs.shape == (5, 2)
    np.testing.assert_allclose(vals, np.sort(np.linalg.eigvalsh(a))[::-1][:2], atol=1e-10)


def test_sym_eigen_rejects_asymmetric():
    with pytest.raises(ShapeError):
        sym_eigen([[1.0, 2.0], [0.0, 1.0]])


def test_pairwise_trivial():
    np.testing.assert_array_equal(pairwise_sq_dist([[1.0, 2.0]]), [[0.0]])
    d = pairwise_sq_dist([[0.0, 0.0], [3.0, 4.0]])
    np.testing.assert_allclose(d, [[0.0, 25.0], [25.0, 0.0]])


def test_pairwise_matches_loop(rng):
    x = rng.normal(size=(10, 4))
    d = pairwise_sq_dist(x)
    for i in range(10):
        for j in range(10):
            assert abs(d[i, j] - np.sum((x[i] - x[j]) ** 2)) < 1e-10
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 3), elements=st.floats(-100, 100)))
def test_pairwise_triangle_inequality(x):
    dist = np.sqrt(pairwise_sq_dist(x))
    n = x.shape[0]
    scale = max(1.0, dist.max())
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert dist[i, k] <= dist[i, j] + dist[j, k] + 1e-6 * scale
