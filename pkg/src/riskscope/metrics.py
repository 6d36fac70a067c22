"""Regression error metrics (MAE, MSE, R^2)."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError, UndefinedMetricError
from .numcore import as_vector


@dataclass(frozen=True)
class EvalResult:
    mae: float
    mse: float
    r2: float
    n: int

    def as_row(self):
        return {"MAE": self.mae, "MSE": self.mse, "R2": self.r2}


def _pair(pred, truth):
    pred = as_vector(pred, "pred")
    truth = as_vector(truth, "truth")
    if pred.shape != truth.shape:
        raise ShapeError(f"pred has {pred.shape[0]} entries, truth has {truth.shape[0]}")
    if pred.shape[0] == 0:
        raise ShapeError("metrics need at least one sample")
    return pred, truth


def mae(pred, truth):
    pred, truth = _pair(pred, truth)
    return float(np.mean(np.abs(pred - truth)))


def mse(pred, truth):
    pred, truth = _pair(pred, truth)
    return float(np.mean((pred - truth) ** 2))


def r2(pred, truth):
    """Coefficient of determination ``1 - SS_res / SS_tot``."""
    pred, truth = _pair(pred, truth)
    if truth.shape[0] < 2:
        raise UndefinedMetricError("R^2 needs at least two samples")
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedMetricError("R^2 is undefined for a constant target")
    return 1.0 - float(np.sum((truth - pred) ** 2)) / ss_tot


def evaluate(model, test):
    """MAE, MSE and R^2 of ``model`` on a held-out :class:`~riskscope.dataset.Dataset`."""
    from .regress import predict

    if len(test) == 0:
        raise ShapeError("test set is empty")
    pred = predict(model, test.x)
    return EvalResult(mae(pred, test.y), mse(pred, test.y), r2(pred, test.y), len(test))
