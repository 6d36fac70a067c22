"""Epsilon-insensitive support vector regression solved by SMO.

The dual is written over ``2N`` variables ``a = [alpha, alpha*]``::

    min  1/2 a'Qa + p'a    s.t.  z'a = 0,  0 <= a <= C

with ``z = [+1]*N + [-1]*N``, ``Q_st = z_s z_t K(x_s, x_t)`` and
``p = [eps - y, eps + y]``. Each step picks a maximal-violating pair with
second-order gain and solves the two-variable subproblem analytically.
The regression function is ``f(x) = sum_i (alpha_i - alpha*_i) K(x_i, x) + b``.
"""

import numpy as np

from ..numcore import pairwise_sq_dist
from .base import Hyperparams, ModelFit, check_xy

TAU = 1e-12


def linear_kernel(a, b):
    return a @ b.T


def rbf_kernel(a, b, gamma):
    """``exp(-gamma * ||a_i - b_j||^2)``."""
    sq = (
        np.einsum("ij,ij->i", a, a)[:, None]
        + np.einsum("ij,ij->i", b, b)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def svr_dual_objective(K, y, delta, epsilon):
    """Dual objective (to be maximised) at ``delta = alpha - alpha*``."""
    return float(-0.5 * delta @ K @ delta - epsilon * np.abs(delta).sum() + y @ delta)


def smo_solve(K, y, c, epsilon, tol=1e-3, max_iter=200_000):
    """Solve the epsilon-SVR dual for a precomputed kernel matrix.

    Returns ``(delta, b, info)`` where ``delta = alpha - alpha*`` and ``info``
    carries ``converged``, ``iterations`` and the final KKT ``gap``.
    """
    n = y.shape[0]
    z = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - y, epsilon + y])
    a = np.zeros(2 * n)
    G = p.copy()
    kdiag = np.diag(K).copy()
    qd = np.concatenate([kdiag, kdiag])
    C = float(c)

    # row r of k_pm is [K_r, -K_r]; column t of Q is z_t * k_pm[t mod n]
    k_pm = np.hstack([K, -K])
    k_pp = np.hstack([K, K])
    z_pos = z > 0

    converged = False
    it = 0
    gap = np.inf
    for it in range(1, max_iter + 1):
        below_c = a < C
        above_0 = a > 0
        up = np.where(z_pos, below_c, above_0)
        low = np.where(z_pos, above_0, below_c)
        minus_zg = -z * G
        if not up.any() or not low.any():
            gap = 0.0
            converged = True
            break
        cand = np.where(up, minus_zg, -np.inf)
        i = int(np.argmax(cand))
        g_max = cand[i]
        g_max2 = np.max(np.where(low, -minus_zg, -np.inf))
        gap = g_max + g_max2
        if gap < tol:
            converged = True
            break

        kj_all = k_pp[i % n]
        grad_diff = g_max - minus_zg
        quad = qd[i] + qd - 2.0 * kj_all
        quad = np.where(quad > 0, quad, TAU)
        gain = np.where(low & (grad_diff > 0), -(grad_diff ** 2) / quad, np.inf)
        j = int(np.argmin(gain))
        if not np.isfinite(gain[j]):
            converged = True
            gap = 0.0
            break

        Qi = z[i] * k_pm[i % n]
        Qj = z[j] * k_pm[j % n]
        ai_old, aj_old = a[i], a[j]
        if z[i] != z[j]:
            qc = qd[i] + qd[j] + 2.0 * Qi[j]
            qc = qc if qc > 0 else TAU
            delta = (-G[i] - G[j]) / qc
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = diff
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = -diff
            if diff > 0:
                if a[i] > C:
                    a[i] = C
                    a[j] = C - diff
            else:
                if a[j] > C:
                    a[j] = C
                    a[i] = C + diff
        else:
            qc = qd[i] + qd[j] - 2.0 * Qi[j]
            qc = qc if qc > 0 else TAU
            delta = (G[i] - G[j]) / qc
            total = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if total > C:
                if a[i] > C:
                    a[i] = C
                    a[j] = total - C
            else:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = total
            if total > C:
                if a[j] > C:
                    a[j] = C
                    a[i] = total - C
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = total
        G += Qi * (a[i] - ai_old) + Qj * (a[j] - aj_old)

    # bias from free variables, or the midpoint of the feasible interval
    zg = z * G
    at_upper = a >= C
    at_lower = a <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = float(zg[free].mean())
    else:
        ub_mask = (at_upper & (z < 0)) | (at_lower & (z > 0))
        lb_mask = (at_upper & (z > 0)) | (at_lower & (z < 0))
        ub = zg[ub_mask].min() if ub_mask.any() else np.inf
        lb = zg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else float(
            ub if np.isfinite(ub) else lb
        )
    delta_coef = a[:n] - a[n:]
    info = {"converged": converged, "iterations": it, "gap": float(gap)}
    return delta_coef, -rho, info


def fit_svr(x, y, h=None, kernel="rbf"):
    """Fit epsilon-SVR with a linear or RBF kernel.

    Linear fits also expose ``coef``/``intercept`` so they work with
    coefficient-based feature ranking.
    """
    h = h or Hyperparams()
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"unknown kernel {kernel!r}")
    x, y = check_xy(x, y)
    n, p = x.shape
    if kernel == "rbf":
        gamma = float(h.rbf_gamma) if h.rbf_gamma is not None else 1.0 / p
        K = np.exp(-gamma * pairwise_sq_dist(x))
    else:
        gamma = None
        K = linear_kernel(x, x)
    delta, b, info = smo_solve(K, y, h.svr_c, h.svr_epsilon, h.svr_tol, h.svr_max_iter)
    info["dual_objective"] = svr_dual_objective(K, y, delta, h.svr_epsilon)
    info["n_support"] = int(np.count_nonzero(delta))

    if kernel == "linear":
        state = {
            "coef": x.T @ delta,
            "intercept": float(b),
            "dual_coef": delta,
            "delta": delta,
        }
        return ModelFit("svr_linear", h, p, state, info)
    sv = np.flatnonzero(delta)
    state = {
        "support_x": x[sv].copy(),
        "dual_coef": delta[sv].copy(),
        "intercept": float(b),
        "gamma": gamma,
        "support": sv,
        "delta": delta,
    }
    return ModelFit("svr_rbf", h, p, state, info)


def predict_svr(m, x):
    if m.kind == "svr_linear":
        return x @ m.state["coef"] + m.state["intercept"]
    sx = m.state["support_x"]
    if sx.shape[0] == 0:
        return np.full(x.shape[0], m.state["intercept"])
    return rbf_kernel(x, sx, m.state["gamma"]) @ m.state["dual_coef"] + m.state["intercept"]
