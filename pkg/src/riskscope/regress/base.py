from dataclasses import asdict, dataclass, field, fields, replace
import json

import numpy as np

from ..exceptions import ShapeError
from ..numcore import as_matrix, as_vector

KINDS = ("knn", "ols", "lasso", "ridge", "svr_linear", "svr_rbf", "tree", "forest")
LINEAR_KINDS = ("ols", "lasso", "ridge", "svr_linear")

MODEL_LABELS = {
    "knn": "KNN",
    "ols": "Linear Regression",
    "lasso": "Lasso Regression",
    "ridge": "Ridge Regression",
    "svr_linear": "SVR (Linear Kernel)",
    "svr_rbf": "SVR (RBF Kernel)",
    "tree": "Decision Tree",
    "forest": "Random Forest",
}

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Hyperparams:
    """Knobs for all eight estimators; each fit reads only its own fields.

    ``rbf_gamma=None`` means ``1 / n_features`` at fit time, and
    ``forest_max_features=None`` means ``round(sqrt(n_features))``.
    """

    knn_k: int = 5
    alpha: float = 1.0
    svr_c: float = 1.0
    svr_epsilon: float = 0.1
    rbf_gamma: float | None = None
    svr_tol: float = 1e-3
    svr_max_iter: int = 200_000
    tree_max_depth: int | None = None
    tree_min_leaf: int = 1
    forest_n_trees: int = 100
    forest_seed: int = 0
    forest_max_features: int | None = None
    forest_bootstrap: bool = True
    lasso_tol: float = 1e-7
    lasso_max_sweeps: int = 10_000

    def __post_init__(self):
        if self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.svr_c <= 0:
            raise ValueError("svr_c must be positive")
        if self.svr_epsilon < 0:
            raise ValueError("svr_epsilon must be non-negative")
        if self.rbf_gamma is not None and self.rbf_gamma <= 0:
            raise ValueError("rbf_gamma must be positive")
        if self.tree_max_depth is not None and self.tree_max_depth < 0:
            raise ValueError("tree_max_depth must be >= 0 or None")
        if self.tree_min_leaf < 1:
            raise ValueError("tree_min_leaf must be >= 1")
        if self.forest_n_trees < 1:
            raise ValueError("forest_n_trees must be >= 1")
        if self.forest_max_features is not None and self.forest_max_features < 1:
            raise ValueError("forest_max_features must be >= 1 or None")

    def updated(self, **changes):
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class ModelFit:
    """A trained estimator.

    ``state`` holds the learned arrays for the kind (see the ``fit_*``
    functions); ``diagnostics`` holds solver information such as
    ``converged`` and iteration counts.
    """

    kind: str
    hyperparams: Hyperparams
    n_features: int
    state: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def coef(self):
        """Linear coefficients (one per feature) for linear kinds and linear SVR."""
        if "coef" not in self.state:
            raise AttributeError(f"{self.kind} models have no coefficients")
        return self.state["coef"]

    @property
    def intercept(self):
        return self.state["intercept"]

    def predict(self, x):
        from . import predict

        return predict(self, x)

    def to_dict(self):
        return {
            "format": "riskscope.modelfit",
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "n_features": self.n_features,
            "hyperparams": asdict(self.hyperparams),
            "state": _encode(self.state),
            "diagnostics": _encode(self.diagnostics),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format") != "riskscope.modelfit":
            raise ValueError("not a riskscope model document")
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {doc.get('version')}")
        if doc["kind"] not in KINDS:
            raise ValueError(f"unknown model kind {doc['kind']!r}")
        return cls(
            kind=doc["kind"],
            hyperparams=Hyperparams.from_dict(doc["hyperparams"]),
            n_features=int(doc["n_features"]),
            state=_decode(doc["state"]),
            diagnostics=_decode(doc["diagnostics"]),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype), "shape": list(obj.shape)}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=obj["dtype"]).reshape(obj["shape"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def check_xy(x, y):
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"x has {x.shape[0]} rows, y has {y.shape[0]}")
    return x, y


def check_predict_input(m, x):
    x = as_matrix(x, "x")
    if x.shape[1] != m.n_features:
        raise ShapeError(f"model was fitted on {m.n_features} features, got {x.shape[1]}")
    return x
