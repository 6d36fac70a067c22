"""Small dense linear-algebra kernels.

Matrices are 2-D float64 ``numpy.ndarray`` objects and vectors are 1-D
arrays. :func:`as_matrix` and :func:`as_vector` are the validating
constructors; everything else assumes its inputs already went through them.
"""

import numpy as np

from .exceptions import ConvergenceError, ShapeError, SingularMatrixError

JACOBI_MAX_SWEEPS = 100


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array (copying only if needed)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def as_vector(v, name="vector"):
    x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or Inf")
    return x


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def cholesky(a):
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Raises :class:`SingularMatrixError` on a non-positive pivot.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"cholesky needs a square matrix, got {a.shape}")
    L = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > 0.0:
            raise SingularMatrixError(f"non-positive pivot {pivot:.3g} at column {j}")
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def _forward_sub(L, b):
    x = np.empty_like(b)
    for i in range(len(b)):
        x[i] = (b[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def _back_sub(U, b):
    n = len(b)
    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    return x


def solve_spd(a, b):
    """Solve ``a @ x = b`` for symmetric positive definite ``a`` via Cholesky."""
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise ShapeError(f"incompatible system: a {a.shape}, b {b.shape}")
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise SingularMatrixError("matrix is not symmetric")
    L = cholesky(a)
    return _back_sub(L.T, _forward_sub(L, b))


def sym_eigen(a, top_k=None, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric matrix.
    top_k : int, optional
        Number of leading eigenpairs to return (default: all).
    max_sweeps : int
        Cap on full off-diagonal sweeps before :class:`ConvergenceError`.

    Returns
    -------
    eigenvalues : (top_k,) ndarray
        Descending order.
    eigenvectors : (n, top_k) ndarray
        Column ``i`` pairs with ``eigenvalues[i]``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"sym_eigen needs a square matrix, got {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ShapeError("sym_eigen needs a symmetric matrix")
    top_k = n if top_k is None else int(top_k)
    if not 1 <= top_k <= n:
        raise ValueError(f"top_k must be in [1, {n}], got {top_k}")

    A = 0.5 * (a + a.T)
    V = np.eye(n)
    scale = np.linalg.norm(A)
    converged = n == 1 or scale == 0.0
    for _ in range(max_sweeps):
        if converged:
            break
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= 1e-15 * scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    else:
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off > 1e-15 * scale:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")[:top_k]
    return vals[order], V[:, order]


def pairwise_sq_dist(x):
    """Squared Euclidean distances between all rows of ``x``.

    The result is exactly symmetric with a zero diagonal and no negative
    entries from cancellation.
    """
    x = as_matrix(x, "x")
    if x.shape[0] == 0:
        raise ShapeError("pairwise_sq_dist needs at least one row")
    sq = np.einsum("ij,ij->i", x, x)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d
