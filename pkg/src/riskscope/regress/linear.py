"""Ordinary least squares, ridge and lasso.

All three centre ``x`` and ``y`` first; the intercept is recovered
afterwards and is never penalised.
"""

import numpy as np

from ..exceptions import InsufficientDataError, SingularMatrixError
from ..numcore import solve_spd
from .base import Hyperparams, ModelFit, check_xy

OLS_JITTER = 1e-10


def _centre(x, y):
    x_mean = x.mean(axis=0)
    y_mean = y.mean()
    return x - x_mean, y - y_mean, x_mean, y_mean


def _linear_fit(kind, h, coef, x_mean, y_mean, diagnostics=None):
    coef = np.asarray(coef, dtype=np.float64)
    return ModelFit(
        kind=kind,
        hyperparams=h,
        n_features=coef.shape[0],
        state={"coef": coef, "intercept": float(y_mean - x_mean @ coef)},
        diagnostics=diagnostics or {},
    )


def _normal_equations(xc, yc, shift):
    gram = xc.T @ xc
    rhs = xc.T @ yc
    p = gram.shape[0]
    try:
        return solve_spd(gram + shift * np.eye(p), rhs), shift
    except SingularMatrixError:
        if shift > 0:
            raise
    # rank-deficient design: minimal jitter keeps the factorisation alive
    jitter = OLS_JITTER * max(1.0, float(np.trace(gram)) / p)
    return solve_spd(gram + jitter * np.eye(p), rhs), jitter


def fit_ols(x, y, h=None):
    """Least squares via Cholesky on the normal equations."""
    x, y = check_xy(x, y)
    if x.shape[0] < 2:
        raise InsufficientDataError("OLS needs at least 2 rows")
    xc, yc, x_mean, y_mean = _centre(x, y)
    coef, shift = _normal_equations(xc, yc, 0.0)
    return _linear_fit("ols", h or Hyperparams(), coef, x_mean, y_mean, {"jitter": shift})


def fit_ridge(x, y, h):
    """Solve ``(Xc'Xc + alpha I) b = Xc'yc`` on centred data."""
    if h.alpha < 0:
        raise ValueError("ridge alpha must be non-negative")
    x, y = check_xy(x, y)
    if x.shape[0] < 2:
        raise InsufficientDataError("ridge needs at least 2 rows")
    xc, yc, x_mean, y_mean = _centre(x, y)
    coef, shift = _normal_equations(xc, yc, float(h.alpha))
    return _linear_fit("ridge", h, coef, x_mean, y_mean, {"jitter": shift - h.alpha})


def soft_threshold(z, t):
    return np.sign(z) * max(abs(z) - t, 0.0)


def lasso_alpha_max(x, y):
    """Smallest alpha at which the lasso solution is identically zero."""
    x, y = check_xy(x, y)
    xc, yc, _, _ = _centre(x, y)
    return _alpha_max(xc, yc)


def _alpha_max(xc, yc):
    return float(np.max(np.abs(xc.T @ yc)) / xc.shape[0])


def fit_lasso(x, y, h):
    """Cyclic coordinate descent on ``(1/2N)||y - Xb||^2 + alpha ||b||_1``.

    Inputs are expected to be standardized. Stops when the largest
    coefficient change in a sweep drops below ``h.lasso_tol``; hitting
    ``h.lasso_max_sweeps`` first sets ``diagnostics["converged"] = False``.
    """
    if h.alpha < 0:
        raise ValueError("lasso alpha must be non-negative")
    x, y = check_xy(x, y)
    n, p = x.shape
    if n < 2:
        raise InsufficientDataError("lasso needs at least 2 rows")
    xc, yc, x_mean, y_mean = _centre(x, y)
    col_sq = np.einsum("ij,ij->j", xc, xc) / n
    alpha = float(h.alpha)

    coef = np.zeros(p)
    if p and alpha >= _alpha_max(xc, yc):
        # zero is optimal; skip the sweeps so round-off cannot leak a tiny coefficient
        return _linear_fit("lasso", h, coef, x_mean, y_mean, {"converged": True, "sweeps": 0})
    resid = yc.copy()
    converged = False
    sweeps = 0
    for sweeps in range(1, h.lasso_max_sweeps + 1):
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = coef[j]
            rho = xc[:, j] @ resid / n + col_sq[j] * old
            new = soft_threshold(rho, alpha) / col_sq[j]
            if new != old:
                resid -= xc[:, j] * (new - old)
                coef[j] = new
                max_delta = max(max_delta, abs(new - old))
        if max_delta < h.lasso_tol:
            converged = True
            break
    return _linear_fit(
        "lasso", h, coef, x_mean, y_mean, {"converged": converged, "sweeps": sweeps}
    )


def lasso_kkt_violation(x, y, coef, alpha):
    """Largest violation of the lasso subgradient optimality conditions.

    With ``g = Xc'(yc - Xc b) / N``: active coordinates need
    ``g_j == alpha * sign(b_j)``, inactive ones ``|g_j| <= alpha``.
    """
    x, y = check_xy(x, y)
    xc, yc, _, _ = _centre(x, y)
    g = xc.T @ (yc - xc @ coef) / x.shape[0]
    active = coef != 0
    viol = np.where(active, np.abs(g - alpha * np.sign(coef)), np.maximum(np.abs(g) - alpha, 0.0))
    return float(viol.max()) if viol.size else 0.0
