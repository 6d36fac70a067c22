"""The eight regression estimators behind one ``fit``/``predict`` contract."""

import numpy as np

from ..exceptions import UnsupportedModelError
from .base import (
    KINDS,
    LINEAR_KINDS,
    MODEL_LABELS,
    Hyperparams,
    ModelFit,
    check_predict_input,
)
from .knn import fit_knn, predict_knn
from .linear import fit_lasso, fit_ols, fit_ridge, lasso_alpha_max, lasso_kkt_violation
from .svr import fit_svr, predict_svr, rbf_kernel, smo_solve, svr_dual_objective
from .tree import fit_forest, fit_tree, per_tree_predictions, predict_tree

DEFAULT_KNN_CANDIDATES = (1, 2, 3, 4, 5, 6, 7, 8, 9)
DEFAULT_ALPHAS = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)

__all__ = [
    "KINDS",
    "LINEAR_KINDS",
    "MODEL_LABELS",
    "Hyperparams",
    "ModelFit",
    "fit",
    "fit_knn",
    "fit_ols",
    "fit_ridge",
    "fit_lasso",
    "fit_svr",
    "fit_tree",
    "fit_forest",
    "predict",
    "importances",
    "tune_knn",
    "tune_alpha",
    "lasso_alpha_max",
    "lasso_kkt_violation",
    "smo_solve",
    "svr_dual_objective",
    "rbf_kernel",
    "per_tree_predictions",
]


def fit(kind, x, y, h=None):
    """Fit the estimator named by ``kind`` (one of :data:`KINDS`)."""
    h = h or Hyperparams()
    if kind == "knn":
        return fit_knn(x, y, h)
    if kind == "ols":
        return fit_ols(x, y, h)
    if kind == "ridge":
        return fit_ridge(x, y, h)
    if kind == "lasso":
        return fit_lasso(x, y, h)
    if kind == "svr_linear":
        return fit_svr(x, y, h, kernel="linear")
    if kind == "svr_rbf":
        return fit_svr(x, y, h, kernel="rbf")
    if kind == "tree":
        return fit_tree(x, y, h)
    if kind == "forest":
        return fit_forest(x, y, h)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def predict(m, x):
    x = check_predict_input(m, x)
    if m.kind == "knn":
        return predict_knn(m, x)
    if m.kind in ("ols", "ridge", "lasso"):
        return x @ m.state["coef"] + m.state["intercept"]
    if m.kind in ("svr_linear", "svr_rbf"):
        return predict_svr(m, x)
    if m.kind in ("tree", "forest"):
        return predict_tree(m, x)
    raise ValueError(f"unknown model kind {m.kind!r}")


def importances(m):
    """Per-feature importance: ``|coef|`` for linear kinds, split gain share for trees."""
    if m.kind in LINEAR_KINDS:
        return np.abs(m.state["coef"])
    if m.kind in ("tree", "forest"):
        return m.state["importances"]
    raise UnsupportedModelError(f"{m.kind} exposes no feature importances")


def _holdout(n, seed, fraction=0.2):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = max(1, int(round(n * fraction)))
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def _validation_mae(kind, x, y, h, tr, va):
    m = fit(kind, x[tr], y[tr], h)
    return float(np.mean(np.abs(predict(m, x[va]) - y[va])))


def tune_knn(x, y, k_candidates=DEFAULT_KNN_CANDIDATES, split_seed=0, base=None):
    """Pick ``knn_k`` by validation MAE on a seeded 80/20 holdout.

    Candidates larger than the training part are skipped; ties go to the
    smaller ``k``. Returns ``base`` (or defaults) with ``knn_k`` replaced.
    """
    base = base or Hyperparams()
    candidates = list(k_candidates)
    if not candidates:
        raise ValueError("k_candidates must be non-empty")
    if len(candidates) == 1:
        return base.updated(knn_k=int(candidates[0]))
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    tr, va = _holdout(x.shape[0], split_seed)
    scores = {}
    for k in sorted(set(int(k) for k in candidates)):
        if k > tr.shape[0]:
            continue
        scores[k] = _validation_mae("knn", x, y, base.updated(knn_k=k), tr, va)
    if not scores:
        raise ValueError("no k candidate fits in the training split")
    best = min(scores, key=lambda k: (scores[k], k))
    return base.updated(knn_k=best)


def tune_alpha(x, y, kind, alphas=DEFAULT_ALPHAS, split_seed=0, base=None):
    """Pick the lasso/ridge ``alpha`` with the lowest validation MAE (ties to the smaller alpha)."""
    if kind not in ("lasso", "ridge"):
        raise ValueError(f"tune_alpha supports lasso and ridge, got {kind!r}")
    base = base or Hyperparams()
    candidates = list(alphas)
    if not candidates:
        raise ValueError("alphas must be non-empty")
    if len(candidates) == 1:
        return base.updated(alpha=float(candidates[0]))
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    tr, va = _holdout(x.shape[0], split_seed)
    scores = {
        float(a): _validation_mae(kind, x, y, base.updated(alpha=float(a)), tr, va)
        for a in sorted(set(float(a) for a in candidates))
    }
    best = min(scores, key=lambda a: (scores[a], a))
    return base.updated(alpha=best)


def validation_scores(kind, x, y, param, values, split_seed=0, base=None):
    """Validation MAE per candidate value of ``param`` (``"knn_k"`` or ``"alpha"``)."""
    base = base or Hyperparams()
    tr, va = _holdout(np.asarray(x).shape[0], split_seed)
    return {
        v: _validation_mae(kind, np.asarray(x, float), np.asarray(y, float),
                           base.updated(**{param: v}), tr, va)
        for v in values
    }
