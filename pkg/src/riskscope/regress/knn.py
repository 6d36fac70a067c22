import numpy as np

from .base import Hyperparams, ModelFit, check_xy


def fit_knn(x, y, h=None):
    """Store the training set; prediction averages the ``h.knn_k`` nearest labels."""
    h = h or Hyperparams()
    x, y = check_xy(x, y)
    if h.knn_k > x.shape[0]:
        raise ValueError(f"knn_k={h.knn_k} exceeds the {x.shape[0]} training rows")
    return ModelFit("knn", h, x.shape[1], {"x": x.copy(), "y": y.copy()})


def knn_neighbors(train_x, query, k):
    """Indices of the ``k`` nearest training rows to each query row.

    Euclidean distance; ties go to the lower training index.
    """
    out = np.empty((query.shape[0], k), dtype=np.intp)
    for i, q in enumerate(query):
        d = np.sum((train_x - q) ** 2, axis=1)
        out[i] = np.argsort(d, kind="stable")[:k]
    return out


def predict_knn(m, x):
    idx = knn_neighbors(m.state["x"], x, m.hyperparams.knn_k)
    return m.state["y"][idx].mean(axis=1)
