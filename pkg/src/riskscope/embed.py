"""Two-dimensional embeddings: PCA projection and exact t-SNE.

t-SNE here is the plain O(N^2) algorithm: Gaussian input affinities with
per-point bandwidths calibrated to a target perplexity, Student-t output
affinities, and gradient descent with momentum, per-coordinate gains and
an early-exaggeration phase.
"""

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cluster import kmeans, silhouette
from .exceptions import CalibrationError, EmbeddingError, InsufficientDataError, ShapeError
from .numcore import as_matrix, pairwise_sq_dist, sym_eigen

EXAGGERATION = 4.0
EXAGGERATION_MAX_STEPS = 100
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
MOMENTUM_SWITCH = 250
Q_GUARD = 1e-12
INIT_STD = 1e-2
MIN_GAIN = 0.01
PERPLEXITY_TOL = 1e-5

DEFAULT_PERPLEXITIES = (5.0, 30.0)
DEFAULT_LEARNING_RATES = (10.0, 1000.0)
DEFAULT_ITERATIONS = (250, 500, 1000)


@dataclass(frozen=True)
class PcaModel:
    components: np.ndarray  # (2, p), orthonormal rows
    explained_variance: np.ndarray
    means: np.ndarray


@dataclass(frozen=True, order=True)
class TsneParams:
    perplexity: float = 30.0
    learning_rate: float = 200.0
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.perplexity > 0:
            raise ValueError("perplexity must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class Embedding:
    points: np.ndarray
    method: str
    params: object = None
    final_kl: float | None = None
    kl_trace: np.ndarray | None = field(default=None, repr=False)
    exaggeration_steps: int = 0

    @property
    def kl_after_exaggeration(self):
        """KL divergence when early exaggeration switched off."""
        if self.kl_trace is None:
            return None
        return float(self.kl_trace[self.exaggeration_steps])


# -- PCA ---------------------------------------------------------------------

def pca_fit(x, n_components=2):
    """Leading principal axes of the sample covariance of ``x``.

    Each component is sign-fixed so its largest-magnitude entry is positive.
    """
    x = as_matrix(x, "x")
    n, p = x.shape
    if n < 3:
        raise InsufficientDataError("PCA needs at least 3 rows")
    if not 1 <= n_components <= p:
        raise ValueError(f"n_components must be in [1, {p}]")
    means = x.mean(axis=0)
    xc = x - means
    cov = xc.T @ xc / (n - 1)
    vals, vecs = sym_eigen(cov, top_k=n_components)
    comps = vecs.T.copy()
    for r in range(comps.shape[0]):
        j = int(np.argmax(np.abs(comps[r])))
        if comps[r, j] < 0:
            comps[r] = -comps[r]
    return PcaModel(comps, np.maximum(vals, 0.0), means)


def pca_transform(model, x):
    x = as_matrix(x, "x")
    if x.shape[1] != model.means.shape[0]:
        raise ShapeError(f"PCA was fitted on {model.means.shape[0]} columns, got {x.shape[1]}")
    return Embedding((x - model.means) @ model.components.T, "pca", None)


def pca_inverse(model, points):
    return np.asarray(points) @ model.components + model.means


# -- t-SNE affinities ----------------------------------------------------------

def _row_distribution(d, beta):
    """Conditional Gaussian row and its Shannon entropy in bits."""
    shifted = d - d.min()
    w = np.exp(-beta * shifted)
    s = w.sum()
    prob = w / s
    nz = prob > 0
    h = -np.sum(prob[nz] * np.log2(prob[nz]))
    return prob, h


def conditional_affinities(sq_dists, perplexity, tol=PERPLEXITY_TOL, max_steps=200):
    """Row-stochastic ``P[i, j] = p(j | i)`` with ``2**H(P_i) == perplexity``.

    Bandwidths are found per row by bisection on the Gaussian precision.
    Returns ``(P, betas)``.
    """
    d = as_matrix(sq_dists, "sq_dists")
    n = d.shape[0]
    if d.shape != (n, n):
        raise ShapeError("sq_dists must be square")
    if not 0 < perplexity < n:
        raise ValueError(f"perplexity must lie in (0, {n}), got {perplexity}")
    if n < 2:
        raise InsufficientDataError("affinities need at least 2 points")
    target = np.log2(perplexity)
    P = np.zeros((n, n))
    betas = np.empty(n)
    for i in range(n):
        di = np.delete(d[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        spread = di.max() - di.min()
        if spread > 0:
            beta = 1.0 / spread
        ok = False
        for _ in range(max_steps):
            prob, h = _row_distribution(di, beta)
            if abs(2.0 ** h - perplexity) < tol:
                ok = True
                break
            if h > target:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = 0.5 * (beta + lo)
        if not ok:
            raise CalibrationError(
                f"row {i}: could not reach perplexity {perplexity} "
                f"(last 2^H = {2.0 ** h:.6g})"
            )
        P[i, np.arange(n) != i] = prob
        betas[i] = beta
    return P, betas


def perplexity_calibration(sq_dists, perplexity):
    """Symmetric joint affinities ``(P_j|i + P_i|j) / 2N`` summing to one."""
    cond, _ = conditional_affinities(sq_dists, perplexity)
    n = cond.shape[0]
    return (cond + cond.T) / (2.0 * n)


def student_t_affinities(y):
    """Output affinities ``Q`` and the kernel ``1 / (1 + ||y_i - y_j||^2)``."""
    num = 1.0 / (1.0 + pairwise_sq_dist(y))
    np.fill_diagonal(num, 0.0)
    Q = num / max(num.sum(), Q_GUARD)
    return Q, num


def kl_divergence(P, Q):
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))


# -- t-SNE optimisation ------------------------------------------------------------

def exaggeration_steps(iterations):
    return min(EXAGGERATION_MAX_STEPS, iterations // 4)


class _Workspace:
    """Preallocated N x N buffers for the optimisation loop."""

    def __init__(self, n):
        self.d2 = np.empty((n, n))
        self.tmp = np.empty((n, n))
        self.num = np.empty((n, n))
        self.w = np.empty((n, n))

    def kernel(self, Y):
        """Student-t kernel ``1 / (1 + d^2)`` (zero diagonal) and its sum; fills ``d2``."""
        d2, tmp, num = self.d2, self.tmp, self.num
        np.subtract(Y[:, 0, None], Y[None, :, 0], out=d2)
        np.multiply(d2, d2, out=d2)
        np.subtract(Y[:, 1, None], Y[None, :, 1], out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        d2 += tmp
        np.add(d2, 1.0, out=num)
        np.reciprocal(num, out=num)
        np.fill_diagonal(num, 0.0)
        return num, max(float(num.sum()), Q_GUARD)

    def log1p_d2(self):
        return np.log1p(self.d2, out=self.tmp)


def tsne_from_affinities(P, params, init=None, callback=None):
    """Optimise a 2-D embedding for precomputed joint affinities ``P``.

    ``kl_trace[0]`` is the KL divergence at the initial layout and
    ``kl_trace[t]`` the value after step ``t``; KL always uses the
    unexaggerated ``P``. ``callback(step, Y, Q)`` runs after each step.
    """
    n = P.shape[0]
    if init is None:
        rng = np.random.default_rng(params.seed)
        Y = rng.normal(0.0, INIT_STD, size=(n, 2))
    else:
        Y = as_matrix(init, "init").copy()
        if Y.shape != (n, 2):
            raise ShapeError(f"init must have shape ({n}, 2)")
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    n_exag = exaggeration_steps(params.iterations)
    trace = np.empty(params.iterations + 1)

    # KL(P||Q) = sum P log P + sum P log(1 + d^2) + log Z * sum P
    p_flat = P.ravel()
    pos = p_flat > 0
    p_entropy = float(np.sum(p_flat[pos] * np.log(p_flat[pos])))
    p_total = float(p_flat.sum())

    ws = _Workspace(n)

    def kl(z):
        return p_entropy + float(p_flat @ ws.log1p_d2().ravel()) + np.log(z) * p_total

    num, z = ws.kernel(Y)
    trace[0] = kl(z)

    for step in range(1, params.iterations + 1):
        scale = EXAGGERATION if step <= n_exag else 1.0
        momentum = MOMENTUM_EARLY if step <= MOMENTUM_SWITCH else MOMENTUM_LATE
        # W = (scale * P - Q) * num with Q = num / z
        W = np.multiply(num, 1.0 / z, out=ws.w)
        np.subtract(P * scale if scale != 1.0 else P, W, out=W)
        W *= num
        grad = 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)

        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        update = momentum * update - params.learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)

        if not np.all(np.isfinite(Y)):
            raise EmbeddingError(f"embedding diverged at step {step}")
        num, z = ws.kernel(Y)
        trace[step] = kl(z)
        if callback is not None:
            callback(step, Y, num / z)

    if not np.all(np.isfinite(trace)):
        raise EmbeddingError("non-finite KL divergence")
    return Embedding(Y, "tsne", params, float(trace[-1]), trace, n_exag)


def tsne(x, params=None, init=None, callback=None):
    """Exact t-SNE of the rows of ``x`` into two dimensions."""
    params = params or TsneParams()
    x = as_matrix(x, "x")
    n = x.shape[0]
    if n < 5:
        raise InsufficientDataError("t-SNE needs at least 5 points")
    if not params.perplexity < n:
        raise ValueError(f"perplexity {params.perplexity} must be below N={n}")
    P = perplexity_calibration(pairwise_sq_dist(x), params.perplexity)
    return tsne_from_affinities(P, params, init, callback)


# -- grid search -----------------------------------------------------------------

@dataclass
class GridCell:
    params: TsneParams
    silhouette: float
    embedding: Embedding = field(repr=False)
    clustering: object = field(repr=False, default=None)

    def as_row(self):
        return {
            "Perplexity": self.params.perplexity,
            "Learning Rate": self.params.learning_rate,
            "Iterations": self.params.iterations,
            "Silhouette": self.silhouette,
        }


def score_embedding(points, k=2, seed=0):
    """Silhouette of a k-Means clustering of ``points``; returns ``(score, clustering)``."""
    c = kmeans(points, k, seed)
    return silhouette(points, c.labels), c


def grid_search_tsne(
    x,
    perplexities=DEFAULT_PERPLEXITIES,
    learning_rates=DEFAULT_LEARNING_RATES,
    iteration_counts=DEFAULT_ITERATIONS,
    seed=0,
    k=2,
):
    """Run t-SNE on every grid combination and rank by k-Means silhouette.

    Cells that fail are skipped with a warning. The result is sorted by
    silhouette (descending), then by ``(perplexity, learning_rate,
    iterations)``.
    """
    grids = [list(perplexities), list(learning_rates), list(iteration_counts)]
    if not all(grids):
        raise ValueError("t-SNE grids must be non-empty")
    x = as_matrix(x, "x")
    sq = pairwise_sq_dist(x)
    affinity_cache = {}
    cells = []
    for perp, lr, iters in itertools.product(*grids):
        try:
            params = TsneParams(float(perp), float(lr), int(iters), seed)
            if params.perplexity not in affinity_cache:
                if not params.perplexity < x.shape[0]:
                    raise ValueError(f"perplexity {perp} must be below N={x.shape[0]}")
                affinity_cache[params.perplexity] = perplexity_calibration(sq, params.perplexity)
            emb = tsne_from_affinities(affinity_cache[params.perplexity], params)
            score, clustering = score_embedding(emb.points, k, seed)
        except Exception as exc:  # noqa: BLE001 - a bad cell must not sink the sweep
            warnings.warn(f"t-SNE cell {(perp, lr, iters)} skipped: {exc}", RuntimeWarning)
            continue
        cells.append(GridCell(params, score, emb, clustering))
    cells.sort(
        key=lambda c: (-c.silhouette, c.params.perplexity, c.params.learning_rate, c.params.iterations)
    )
    return cells
