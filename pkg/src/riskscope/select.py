"""Feature ranking from linear coefficients and recursive feature elimination."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import regress
from .exceptions import UnsupportedModelError


@dataclass(frozen=True)
class RankedFeature:
    name: str
    score: float
    rank: int
    index: int


@dataclass(frozen=True)
class FeatureRanking:
    """Features ordered best-first; ``rank`` 1 is the most important."""

    features: tuple
    method: str
    model_kind: str
    n_rounds: int = 0

    def top(self, k):
        return [f.name for f in self.features[:k]]

    def top_indices(self, k):
        return [f.index for f in self.features[:k]]

    def ranks(self):
        """Rank of each feature indexed by original column position."""
        out = np.empty(len(self.features), dtype=np.int64)
        for f in self.features:
            out[f.index] = f.rank
        return out

    def to_rows(self):
        return [{"feature": f.name, "score": f.score, "rank": f.rank} for f in self.features]

    def write_csv(self, path):
        """Two-column ``feature,rank`` CSV in rank order."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "rank"])
            for f in self.features:
                w.writerow([f.name, f.rank])
        return path


def _names(names, p):
    return tuple(names) if names is not None else tuple(f"x{j}" for j in range(p))


def rank_by_coefficients(model, feature_names=None):
    """Order features by ``|coefficient|`` (ties by column index)."""
    if model.kind not in regress.LINEAR_KINDS:
        raise UnsupportedModelError(
            f"coefficient ranking needs a linear model, got {model.kind!r}"
        )
    score = np.abs(model.state["coef"])
    names = _names(feature_names, score.shape[0])
    order = sorted(range(score.shape[0]), key=lambda j: (-score[j], j))
    feats = tuple(
        RankedFeature(names[j], float(score[j]), r, j) for r, j in enumerate(order, start=1)
    )
    return FeatureRanking(feats, "coefficients", model.kind)


def rfe(kind, hyperparams, dataset, n_target=2):
    """Recursive feature elimination.

    Fit ``kind`` on the surviving columns, drop the single least important
    one, repeat until ``n_target`` remain. Survivors are ranked 1..n_target
    by their final importance; eliminated features take the remaining ranks
    in reverse elimination order, so the first one dropped ranks last.
    ``score`` is the importance a feature had when last evaluated.
    """
    if kind in ("knn", "svr_rbf"):
        raise UnsupportedModelError(f"{kind} exposes no importances for RFE")
    if kind not in regress.KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    p = dataset.x.shape[1]
    if not 1 <= n_target <= p:
        raise ValueError(f"n_target must be in [1, {p}], got {n_target}")
    hyperparams = hyperparams or regress.Hyperparams()
    names = dataset.feature_names

    surviving = list(range(p))
    eliminated = []  # (index, score) in elimination order
    rounds = 0
    while True:
        m = regress.fit(kind, dataset.x[:, surviving], dataset.y, hyperparams)
        imp = regress.importances(m)
        if len(surviving) == n_target:
            break
        # lowest importance; ties drop the highest original index
        worst = min(range(len(surviving)), key=lambda i: (imp[i], -surviving[i]))
        eliminated.append((surviving[worst], float(imp[worst])))
        del surviving[worst]
        rounds += 1

    final = sorted(zip(surviving, imp), key=lambda t: (-t[1], t[0]))
    feats = [RankedFeature(names[j], float(s), r, j) for r, (j, s) in enumerate(final, start=1)]
    r = n_target
    for j, s in reversed(eliminated):
        r += 1
        feats.append(RankedFeature(names[j], s, r, j))
    return FeatureRanking(tuple(feats), "rfe", kind, rounds)
