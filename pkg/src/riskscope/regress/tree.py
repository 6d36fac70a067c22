"""CART regression trees and bootstrap forests.

A fitted tree is stored as flat parallel arrays (``feature``, ``threshold``,
``left``, ``right``, ``value``, ``n_samples``); leaves have ``feature == -1``.
Rows with ``x[feature] <= threshold`` go left.
"""

import numpy as np

from .base import Hyperparams, ModelFit, check_xy


def _best_split(x, rows, y, features, min_leaf):
    """Lowest child-SSE split of ``x[rows]`` over ``features``.

    Ties keep the lowest feature index, then the smallest threshold.
    Returns ``(feature, threshold, child_sse)`` or ``None``.
    """
    n = y.shape[0]
    if n < 2 * min_leaf:
        return None
    sub = x[np.ix_(rows, features)]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ys = y[order]
    cs = np.cumsum(ys, axis=0)[:-1]
    cs2 = np.cumsum(ys * ys, axis=0)[:-1]
    total = cs[-1] + ys[-1] if n > 1 else ys[0]
    total_sq = cs2[-1] + ys[-1] ** 2 if n > 1 else ys[0] ** 2
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    sse = (cs2 - cs * cs / nl) + ((total_sq - cs2) - (total - cs) ** 2 / nr)
    valid = xs[:-1] < xs[1:]
    if min_leaf > 1:
        valid &= (nl >= min_leaf) & (nr >= min_leaf)
    sse = np.where(valid, sse, np.inf)
    pos = np.argmin(sse, axis=0)
    col_best = sse[pos, np.arange(sse.shape[1])]
    best = None
    best_sse = np.inf
    for c in np.argsort(np.asarray(features), kind="stable"):
        v = col_best[c]
        if not np.isfinite(v):
            continue
        if best is None or v < best_sse - 1e-12 * max(1.0, best_sse):
            k = pos[c]
            best_sse = float(v)
            best = (int(features[c]), float(0.5 * (xs[k, c] + xs[k + 1, c])), best_sse)
    return best


def build_tree(x, y, max_depth=None, min_leaf=1, max_features=None, rng=None):
    """Grow a regression tree greedily; returns ``(arrays, importances)``.

    ``importances[f]`` is the total SSE reduction from splits on feature
    ``f`` (unnormalised).
    """
    n, p = x.shape
    feature, threshold, left, right, value, counts = [], [], [], [], [], []
    importances = np.zeros(p)
    all_features = np.arange(p)

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        counts.append(int(rows.shape[0]))
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if max_depth is not None and depth >= max_depth:
            continue
        yr = y[rows]
        parent_sse = float(np.sum((yr - yr.mean()) ** 2))
        if parent_sse <= 1e-14 * max(1.0, float(yr @ yr)):
            continue
        if max_features is not None and max_features < p:
            feats = np.sort(rng.choice(p, size=max_features, replace=False))
        else:
            feats = all_features
        split = _best_split(x, rows, yr, feats, min_leaf)
        if split is None:
            continue
        f, t, child_sse = split
        gain = parent_sse - child_sse
        if gain <= 1e-14 * max(1.0, parent_sse):
            continue
        importances[f] += gain
        mask = x[rows, f] <= t
        lrows, rrows = rows[mask], rows[~mask]
        feature[node] = f
        threshold[node] = t
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))

    arrays = {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value, dtype=np.float64),
        "n_samples": np.array(counts, dtype=np.int64),
    }
    return arrays, importances


def predict_tree_arrays(t, x):
    node = np.zeros(x.shape[0], dtype=np.int64)
    rows = np.arange(x.shape[0])
    while True:
        f = t["feature"][node]
        inner = f >= 0
        if not inner.any():
            break
        r = rows[inner]
        nd = node[inner]
        go_left = x[r, f[inner]] <= t["threshold"][nd]
        node[inner] = np.where(go_left, t["left"][nd], t["right"][nd])
    return t["value"][node]


def _normalise(imp):
    s = imp.sum()
    return imp / s if s > 0 else np.zeros_like(imp)


def fit_tree(x, y, h=None):
    """Single CART tree honouring ``tree_max_depth`` and ``tree_min_leaf``."""
    h = h or Hyperparams()
    x, y = check_xy(x, y)
    arrays, imp = build_tree(x, y, h.tree_max_depth, h.tree_min_leaf)
    state = dict(arrays, importances=_normalise(imp))
    return ModelFit("tree", h, x.shape[1], state, {"n_nodes": int(arrays["feature"].shape[0])})


def forest_max_features(h, p):
    if h.forest_max_features is not None:
        return min(int(h.forest_max_features), p)
    return max(1, int(round(np.sqrt(p))))


def fit_forest(x, y, h=None):
    """Bootstrap ensemble of CART trees with per-split feature subsampling.

    Tree ``t`` draws from ``default_rng([forest_seed, t])`` so trees are
    independent of fitting order.
    """
    h = h or Hyperparams()
    x, y = check_xy(x, y)
    n, p = x.shape
    m = forest_max_features(h, p)
    trees = []
    imp = np.zeros(p)
    for t in range(h.forest_n_trees):
        rng = np.random.default_rng([h.forest_seed, t])
        rows = rng.integers(0, n, size=n) if h.forest_bootstrap else np.arange(n)
        arrays, tree_imp = build_tree(
            x[rows], y[rows], h.tree_max_depth, h.tree_min_leaf, m, rng
        )
        trees.append(arrays)
        imp += tree_imp
    state = {"trees": trees, "importances": _normalise(imp), "max_features": m}
    return ModelFit("forest", h, p, state, {"n_trees": len(trees)})


def predict_tree(m, x):
    if m.kind == "tree":
        return predict_tree_arrays(m.state, x)
    preds = np.stack([predict_tree_arrays(t, x) for t in m.state["trees"]])
    return preds.mean(axis=0)


def per_tree_predictions(m, x):
    """(n_trees, N) matrix of member-tree predictions of a forest."""
    return np.stack([predict_tree_arrays(t, x) for t in m.state["trees"]])
