"""Independent reference implementations used only by the test-suite.

Each oracle is written for clarity, not speed, and shares no code with the
package under test.
"""

import numpy as np
from scipy.optimize import minimize


def normal_equation_oracle(x, y, alpha=0.0):
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    beta = np.linalg.inv(xc.T @ xc + alpha * np.eye(x.shape[1])) @ xc.T @ yc
    return beta, y.mean() - x.mean(axis=0) @ beta


def knn_oracle(train_x, train_y, query, k):
    out = []
    for q in query:
        dists = sorted((float(np.sum((row - q) ** 2)), i) for i, row in enumerate(train_x))
        out.append(np.mean([train_y[i] for _, i in dists[:k]]))
    return np.array(out)


def exhaustive_stump(x, y):
    """Best single split over every feature and every midpoint: (sse, feature, threshold)."""
    best = (np.inf, None, None)
    for f in range(x.shape[1]):
        vals = np.unique(x[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            t = 0.5 * (lo + hi)
            left, right = y[x[:, f] <= t], y[x[:, f] > t]
            sse = np.sum((left - left.mean()) ** 2) + np.sum((right - right.mean()) ** 2)
            if sse < best[0] - 1e-12:
                best = (sse, f, t)
    return best


def svr_dual_value(K, y, delta, eps):
    return -0.5 * delta @ K @ delta - eps * np.abs(delta).sum() + y @ delta


def dual_oracle_slsqp(K, y, C, eps):
    """Maximum of the eps-SVR dual over (alpha, alpha*) by a general QP solver."""
    n = y.shape[0]

    def negW(v):
        d = v[:n] - v[n:]
        return 0.5 * d @ K @ d + eps * v.sum() - y @ d

    def grad(v):
        d = v[:n] - v[n:]
        g = K @ d - y
        return np.concatenate([g + eps, -g + eps])

    res = minimize(
        negW, np.zeros(2 * n), jac=grad, method="SLSQP",
        bounds=[(0.0, C)] * (2 * n),
        constraints=[{"type": "eq", "fun": lambda v: v[:n].sum() - v[n:].sum(),
                      "jac": lambda v: np.concatenate([np.ones(n), -np.ones(n)])}],
        options={"ftol": 1e-14, "maxiter": 2000},
    )
    return -res.fun


def dual_oracle_grid(K, y, C, eps, step=0.05, final_step=1e-6, max_passes=200):
    """Brute-force grid maximum of the eps-SVR dual in delta = alpha - alpha*.

    Each move shifts mass between a pair (i, j), keeping sum(delta) = 0, by
    the best of a full grid of offsets. The grid is refined once a whole pass
    brings no gain. Moves along pairs are enough to reach the optimum of this
    concave problem with one equality constraint.
    """
    n = y.shape[0]
    delta = np.zeros(n)
    best = svr_dual_value(K, y, delta, eps)
    while step >= final_step:
        for _ in range(max_passes):
            improved = False
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    lo = max(-C - delta[i], delta[j] - C)
                    hi = min(C - delta[i], delta[j] + C)
                    ts = np.arange(-20, 21) * step
                    ts = ts[(ts >= lo) & (ts <= hi)]
                    if ts.size == 0:
                        continue
                    cand = np.repeat(delta[None, :], ts.size, axis=0)
                    cand[:, i] += ts
                    cand[:, j] -= ts
                    vals = (-0.5 * np.einsum("ki,ij,kj->k", cand, K, cand)
                            - eps * np.abs(cand).sum(1) + cand @ y)
                    k = int(np.argmax(vals))
                    if vals[k] > best + 1e-15:
                        best, delta = vals[k], cand[k]
                        improved = True
            if not improved:
                break
        step /= 4.0
    return best, delta
