"""CSV ingestion, standardization, train/test splitting and a synthetic stand-in dataset."""

import csv
import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    CsvParseError,
    EmptyInputError,
    InsufficientDataError,
    SchemaError,
    ShapeError,
)
from .numcore import as_matrix, as_vector

LABEL_NAME = "risk_factor"
ID_NAMES = ("store_id", "cashier_id")
RISK_MIN, RISK_MAX = 4.0, 16.0

# The first five names are taken from the real retailer schema; the rest are invented
# placeholders in the same reporting style.
FEATURE_NAMES = (
    "Department Sales Item Count",
    "Department Refunds Item Count",
    "Number of Sales Per Day",
    "Number of Item Voids",
    "Department Sales Total Amount",
    "Total Number of Transactions",
    "Total Items Count",
    "Total Sales Amount",
    "Coupons Count",
    "Coupons Total Amount",
    "Coupons Percent of Transactions",
    "Coupons Percent of Total Amount",
    "Coupons Average Amount",
    "Coupons Outside of Orders",
    "Coupons Highest Promo Count",
    "Department Refunds Total Amount",
    "Department Refunds Percent of Items",
    "Refunds Item Count",
    "Refunds Transaction Count",
    "Refunds Total Amount",
    "Item Voids Total Amount",
    "Zero Transaction Count",
    "Zero Transaction Percent",
    "Zero Transactions with Alcohol",
    "Base Average Basket Size",
    "Max Number of Card Uses",
    "No Sale Drawer Opens",
    "Price Override Count",
)

# Indices (into FEATURE_NAMES) driving the synthetic risk label.
SIGNAL_FEATURES = (0, 1, 3, 8, 17, 25)
# Features shifted by the latent "high activity" mode.
MODE_FEATURES = (0, 2, 4, 5, 6, 7, 9, 11, 15, 20, 21, 24)


@dataclass(frozen=True)
class Schema:
    feature_names: tuple
    label_name: str = LABEL_NAME
    id_names: tuple = ID_NAMES

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "id_names", tuple(self.id_names))
        if len(set(self.feature_names)) != len(self.feature_names):
            raise SchemaError("feature names must be unique")
        if self.label_name in self.feature_names:
            raise SchemaError(f"label {self.label_name!r} is also listed as a feature")

    @property
    def n_features(self):
        return len(self.feature_names)

    @classmethod
    def default(cls):
        return cls(FEATURE_NAMES)


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    schema: Schema

    def __post_init__(self):
        x = as_matrix(self.x, "x")
        y = as_vector(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if x.shape[1] != self.schema.n_features:
            raise ShapeError(
                f"x has {x.shape[1]} columns, schema lists {self.schema.n_features}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.shape[0]

    @property
    def feature_names(self):
        return self.schema.feature_names

    def take(self, rows):
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.x[rows], self.y[rows], self.schema)

    def select_features(self, columns):
        """Sub-dataset restricted to ``columns`` (indices), in the given order."""
        columns = [int(c) for c in columns]
        names = tuple(self.schema.feature_names[c] for c in columns)
        schema = Schema(names, self.schema.label_name, self.schema.id_names)
        return Dataset(self.x[:, columns], self.y, schema)


@dataclass(frozen=True)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        if self.means.shape != self.stds.shape:
            raise ShapeError("means and stds differ in length")
        if np.any(self.stds <= 0):
            raise ValueError("standard deviations must be positive")


@dataclass(frozen=True)
class Split:
    train: Dataset
    test: Dataset
    seed: int
    test_indices: np.ndarray = field(repr=False, default=None)


def load_csv(path, schema=None):
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    Identifier columns are dropped, the label column becomes ``y`` and the
    features are returned in ``schema`` order regardless of file order.
    Extra columns are ignored.
    """
    schema = schema or Schema.default()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise EmptyInputError(f"{path} is empty")

    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader)]
    position = {name: i for i, name in enumerate(header)}
    wanted = list(schema.feature_names) + [schema.label_name]
    missing = [name for name in wanted if name not in position]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")
    cols = [position[name] for name in wanted]

    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(header):
            raise CsvParseError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}",
                row=lineno,
            )
        values = []
        for c in cols:
            cell = record[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise CsvParseError(
                    f"{path}:{lineno}: column {header[c]!r} is not numeric: {cell!r}",
                    row=lineno,
                    column=header[c],
                ) from None
            if not np.isfinite(v):
                raise CsvParseError(
                    f"{path}:{lineno}: column {header[c]!r} is not finite",
                    row=lineno,
                    column=header[c],
                )
            values.append(v)
        rows.append(values)
    if not rows:
        raise EmptyInputError(f"{path} has a header but no data rows")

    table = np.array(rows, dtype=np.float64)
    return Dataset(table[:, :-1], table[:, -1], schema)


def write_csv(d, path, ids=None):
    """Write ``d`` as CSV: id columns (if any), then features, then the label.

    ``ids`` is an (N, len(id_names)) integer array; when omitted, store ids
    are zero and cashier ids count from 1.
    """
    n = len(d)
    id_names = d.schema.id_names
    if ids is None:
        ids = np.zeros((n, len(id_names)), dtype=np.int64)
        if len(id_names):
            ids[:, -1] = np.arange(1, n + 1)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(id_names) + list(d.schema.feature_names) + [d.schema.label_name])
        for i in range(n):
            w.writerow(
                [str(int(v)) for v in ids[i]]
                + [repr(float(v)) for v in d.x[i]]
                + [repr(float(d.y[i]))]
            )


def fit_scaler(x):
    """Column means and population standard deviations of ``x``.

    Zero-variance columns get std 1 (they standardize to all zeros) and a
    warning rather than an error.
    """
    x = as_matrix(x, "x")
    if x.shape[0] < 2:
        raise InsufficientDataError("standardization needs at least 2 rows")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    flat = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
    if np.any(flat):
        warnings.warn(
            f"zero-variance column(s) {np.flatnonzero(flat).tolist()} left at zero",
            RuntimeWarning,
            stacklevel=2,
        )
        stds = np.where(flat, 1.0, stds)
    return ScalerParams(means, stds)


def apply_scaler(x, params):
    x = as_matrix(x, "x")
    if x.shape[1] != params.means.shape[0]:
        raise ShapeError(
            f"x has {x.shape[1]} columns, scaler was fitted on {params.means.shape[0]}"
        )
    return (x - params.means) / params.stds


def invert_scaler(z, params):
    return as_matrix(z, "z") * params.stds + params.means


def standardize(d):
    """Zero-mean, unit (population) variance features; returns the dataset and its params."""
    params = fit_scaler(d.x)
    return Dataset(apply_scaler(d.x, params), d.y, d.schema), params


def _fisher_yates(n, seed):
    rng = np.random.default_rng(seed)
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def train_test_split(d, test_fraction=0.1, seed=0):
    """Seeded shuffle split; the test set has ``round(N * test_fraction)`` rows (at least 1)."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = len(d)
    if n < 2:
        raise InsufficientDataError("splitting needs at least 2 rows")
    n_test = min(max(1, int(round(n * test_fraction))), n - 1)
    perm = _fisher_yates(n, seed)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return Split(d.take(train_idx), d.take(test_idx), seed, test_idx)


def synthetic_risk(x):
    """Noise-free synthetic risk score (before scaling into [4, 16]).

    ``x`` holds the standardized values of the six :data:`SIGNAL_FEATURES`
    columns, in that order.
    """
    a, b, c, d, e, f = (x[:, i] for i in range(6))
    return (
        2.0 * np.tanh(1.5 * a)
        + 1.2 * b * c
        + 0.8 * (d ** 2 - 1.0)
        + 1.5 * np.sin(1.5 * e)
        + 0.7 * np.abs(f)
    )


def generate_synthetic(n=991, seed=7, return_ids=False, return_modes=False):
    """Seeded stand-in for the proprietary retailer table.

    Features are driven by four latent behaviour factors plus a binary
    "mode" (roughly one third of cashiers) that shifts a block of volume
    features, so clustering and embedding stages have structure to find.
    The label is :func:`synthetic_risk` of the six signal columns plus
    Gaussian noise, mapped affinely to a 4..16 scale and clipped there.
    """
    n = int(n)
    if n < 10:
        raise ValueError(f"synthetic dataset needs n >= 10, got {n}")
    rng = np.random.default_rng(seed)
    p = len(FEATURE_NAMES)
    n_latent = 4

    loadings = rng.normal(0.0, 1.0, size=(n_latent, p)) / np.sqrt(n_latent)
    # signal columns get their own private factor so the label is not a
    # function of the shared factors alone
    unique_scale = np.full(p, 0.6)
    unique_scale[list(SIGNAL_FEATURES)] = 1.0
    mode_shift = np.zeros(p)
    mode_shift[list(MODE_FEATURES)] = rng.uniform(2.5, 3.5, size=len(MODE_FEATURES))

    modes = (rng.random(n) < 0.35).astype(np.int64)
    latent = rng.normal(size=(n, n_latent))
    z = latent @ loadings + unique_scale * rng.normal(size=(n, p)) + modes[:, None] * mode_shift

    zs = (z - z.mean(axis=0)) / z.std(axis=0)
    raw = synthetic_risk(zs[:, list(SIGNAL_FEATURES)]) + rng.normal(0.0, 0.35, size=n)
    # fixed affine map: centre near 8, roughly one unit per raw standard deviation
    y = np.clip(8.0 + 1.1 * raw, RISK_MIN, RISK_MAX)
    y = np.round(y, 4)

    # report-style magnitudes: positive, varied units
    base = rng.uniform(5.0, 500.0, size=p)
    spread = base * rng.uniform(0.1, 0.3, size=p)
    x = np.round(base + spread * z, 4)

    d = Dataset(x, y, Schema.default())
    extra = []
    if return_ids:
        regions = 10
        store = 1000 + (np.arange(n) % regions) * 10 + rng.integers(0, 10, size=n)
        cashier = np.arange(1, n + 1) + 50000
        extra.append(np.column_stack([store, cashier]).astype(np.int64))
    if return_modes:
        extra.append(modes)
    if extra:
        return (d, *extra)
    return d
