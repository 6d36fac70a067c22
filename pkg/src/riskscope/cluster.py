"""k-Means (k-means++ seeding, Lloyd iterations) and silhouette analysis."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import UndefinedMetricError
from .numcore import as_matrix, pairwise_sq_dist

KMEANS_MAX_ITER = 300


@dataclass
class Clustering:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    k: int
    seed: int
    n_iter: int = 0
    inertia_trace: list = field(default_factory=list)


def _sq_dist_to(x, centroids):
    d = (
        np.einsum("ij,ij->i", x, x)[:, None]
        + np.einsum("ij,ij->i", centroids, centroids)[None, :]
        - 2.0 * (x @ centroids.T)
    )
    return np.maximum(d, 0.0)


def _kmeanspp(x, k, rng):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # every point coincides with a centre; take the lowest unused index
            unused = np.setdiff1d(np.arange(n), chosen)
            nxt = int(unused[0])
        else:
            nxt = int(rng.choice(n, p=closest / total))
        chosen.append(nxt)
        closest = np.minimum(closest, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[chosen].copy()


def _repair_empty(x, labels, centroids, d2):
    """Give each empty cluster the point of the largest cluster farthest from its centre."""
    k = centroids.shape[0]
    for c in range(k):
        if np.any(labels == c):
            continue
        sizes = np.bincount(labels, minlength=k)
        big = int(np.argmax(sizes))
        members = np.flatnonzero(labels == big)
        far = members[int(np.argmax(d2[members, big]))]
        labels[far] = c
        centroids[c] = x[far]
    return labels


def kmeans(x, k, seed=0, max_iter=KMEANS_MAX_ITER):
    """Lloyd's algorithm from a seeded k-means++ start.

    Iterates until the assignment stops changing or ``max_iter`` rounds.
    ``inertia_trace`` records the objective after each assignment step.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(x, k, rng)

    labels = None
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dist_to(x, centroids)
        new_labels = np.argmin(d2, axis=1)
        new_labels = _repair_empty(x, new_labels, centroids, d2)
        trace.append(float(d2[np.arange(n), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centroids[c] = x[labels == c].mean(axis=0)
    inertia = float(np.sum((x - centroids[labels]) ** 2))
    trace.append(inertia)
    return Clustering(labels.astype(np.int64), centroids, inertia, k, int(seed), it, trace)


def silhouette_samples(x, labels):
    """Per-sample silhouette values; members of singleton clusters get 0."""
    x = as_matrix(x, "x")
    labels = np.asarray(labels)
    n = x.shape[0]
    if labels.shape != (n,):
        raise ValueError("labels must have one entry per row of x")
    uniq, inv = np.unique(labels, return_inverse=True)
    if uniq.shape[0] < 2:
        raise UndefinedMetricError("silhouette needs at least two clusters")
    dist = np.sqrt(pairwise_sq_dist(x))
    onehot = np.zeros((n, uniq.shape[0]))
    onehot[np.arange(n), inv] = 1.0
    sums = dist @ onehot  # sum of distances from each point to each cluster
    sizes = onehot.sum(axis=0)
    own = sizes[inv]
    a = np.where(own > 1, sums[np.arange(n), inv] / np.maximum(own - 1, 1), 0.0)
    mean_other = sums / sizes
    mean_other[np.arange(n), inv] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return np.where(own > 1, s, 0.0)


def silhouette(x, labels):
    """Mean silhouette coefficient in [-1, 1]."""
    if np.asarray(x).shape[0] < 3:
        raise UndefinedMetricError("silhouette needs at least 3 samples")
    return float(np.mean(silhouette_samples(x, labels)))


def select_k(x, k_min=2, k_max=10, seed=0):
    """Silhouette of k-Means for each k in ``[k_min, k_max]``.

    Returns ``(best_k, scores)`` where ``scores`` is a list of ``(k, score)``;
    ties favour the smaller k.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    if not 2 <= k_min <= k_max <= n - 1:
        raise ValueError(f"need 2 <= k_min <= k_max <= {n - 1}, got {k_min}..{k_max}")
    scores = []
    for k in range(k_min, k_max + 1):
        c = kmeans(x, k, seed)
        scores.append((k, silhouette(x, c.labels)))
    best_k = max(scores, key=lambda t: (t[1], -t[0]))[0]
    return best_k, scores
