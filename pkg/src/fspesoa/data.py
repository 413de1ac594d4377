"""Dataset loading, min-max scaling and stratified 80:20 splitting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable dataset input."""


@dataclass(frozen=True)
class Dataset:
    """Numeric feature matrix with dense integer labels.

    ``labels`` are integers in ``[0, len(class_names))`` assigned in the
    order each class first appears in the source file.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, m = features.shape
        if n < 1 or m < 1:
            raise DataError("empty dataset")
        if labels.shape != (n,):
            raise DataError(f"expected {n} labels, got {labels.shape[0]}")
        if len(self.feature_names) != m:
            raise DataError(f"expected {m} feature names, got {len(self.feature_names)}")
        if not np.all(np.isfinite(features)):
            raise DataError("features contain NaN or infinite values")
        n_classes = len(self.class_names)
        if labels.min() < 0 or labels.max() >= n_classes:
            raise DataError("label outside [0, n_classes)")
        if np.unique(labels).size != n_classes:
            raise DataError("every class must appear at least once")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class ScalingParams:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=float)
        hi = np.asarray(self.maximum, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DataError("minimum and maximum must be 1-D and equal length")
        if np.any(lo > hi):
            raise DataError("minimum exceeds maximum")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)


@dataclass(frozen=True)
class Split:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int

    @property
    def train(self) -> np.ndarray:
        return np.asarray(self.train_indices, dtype=np.int64)

    @property
    def test(self) -> np.ndarray:
        return np.asarray(self.test_indices, dtype=np.int64)


def load_csv(path, label_column: str | None = None, name: str | None = None) -> Dataset:
    """Read a canonical CSV: header row, numeric features, one label column.

    The label column defaults to the last column.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset file: {path}")
    text = path.read_text(encoding="utf-8")
    return parse_csv(text, label_column=label_column, name=name or path.stem)


def parse_csv(text: str, label_column: str | None = None, name: str = "") -> Dataset:
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise DataError("empty dataset: no header row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError("empty dataset")
    if label_column is None:
        label_idx = len(header) - 1
    elif label_column in header:
        label_idx = header.index(label_column)
    else:
        raise DataError(f"label column {label_column!r} not in header")
    if len(header) < 2:
        raise DataError("need at least one feature column and a label column")

    feature_cols = [j for j in range(len(header)) if j != label_idx]
    features = np.empty((len(body), len(feature_cols)))
    class_index: dict[str, int] = {}
    labels = np.empty(len(body), dtype=np.int64)
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"row {i + 2}: expected {len(header)} cells, got {len(row)}")
        for out_j, j in enumerate(feature_cols):
            cell = row[j].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"row {i + 2}, column {header[j]!r}: non-numeric value {cell!r}"
                ) from None
            if not math.isfinite(value):
                raise DataError(f"row {i + 2}, column {header[j]!r}: non-finite value {cell!r}")
            features[i, out_j] = value
        label = row[label_idx].strip()
        labels[i] = class_index.setdefault(label, len(class_index))

    if len(class_index) < 2:
        raise DataError("need at least 2 distinct labels")
    return Dataset(
        features=features,
        labels=labels,
        feature_names=tuple(header[j] for j in feature_cols),
        class_names=tuple(class_index),
        name=name,
    )


def format_value(x: float) -> str:
    """Shortest round-tripping text for ``x``; integral values lose the ``.0``."""
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def dataset_to_csv(dataset: Dataset, label_column: str = "class") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(dataset.feature_names) + [label_column])
    for row, label in zip(dataset.features, dataset.labels):
        writer.writerow([format_value(v) for v in row] + [dataset.class_names[label]])
    return buf.getvalue()


def write_csv(dataset: Dataset, path, label_column: str = "class") -> None:
    Path(path).write_text(dataset_to_csv(dataset, label_column), encoding="utf-8")


def subset(dataset: Dataset, rows=None, columns=None) -> Dataset:
    """Restrict a dataset to some rows and/or feature columns."""
    X, y = dataset.features, dataset.labels
    names = dataset.feature_names
    if rows is not None:
        X, y = X[rows], y[rows]
    if columns is not None:
        columns = list(columns)
        X = X[:, columns]
        names = tuple(names[j] for j in columns)
    return Dataset(X, y, names, dataset.class_names, dataset.name)


def fit_minmax(train_features) -> ScalingParams:
    X = np.asarray(train_features, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DataError("fit_minmax needs at least one training row")
    return ScalingParams(X.min(axis=0), X.max(axis=0))


def apply_minmax(params: ScalingParams, matrix) -> np.ndarray:
    """Map each column to ``(x - min) / (max - min)``.

    Constant columns map to 0. Values outside the fitted range are not
    clamped, so test rows may fall outside [0, 1].
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.minimum.shape[0]:
        raise DataError(
            f"column count {X.shape[-1] if X.ndim else 0} does not match "
            f"scaling params ({params.minimum.shape[0]})"
        )
    span = params.maximum - params.minimum
    constant = span == 0
    safe = np.where(constant, 1.0, span)
    out = (X - params.minimum) / safe
    out[:, constant] = 0.0
    return out


def split_80_20(dataset: Dataset, seed: int, train_fraction: float = 0.8) -> Split:
    """Stratified split: each class sends ``floor(0.8 * count)`` rows to train."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in range(dataset.n_classes):
        members = np.flatnonzero(dataset.labels == c)
        if members.size < 2:
            raise DataError(
                f"class {dataset.class_names[c]!r} has {members.size} sample(s); need at least 2"
            )
        members = rng.permutation(members)
        n_train = math.floor(train_fraction * members.size)
        # both partitions must receive at least one row of the class
        n_train = min(max(n_train, 1), members.size - 1)
        train.extend(members[:n_train].tolist())
        test.extend(members[n_train:].tolist())
    return Split(tuple(sorted(train)), tuple(sorted(test)), seed)


@dataclass(frozen=True)
class PreparedData:
    """Train/test matrices after splitting and scaling."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    split: Split
    scaling: ScalingParams
    n_classes: int


def prepare(dataset: Dataset, seed: int, scale_before_split: bool = False) -> PreparedData:
    """Split 80:20 and min-max scale.

    By default the scaling is fitted on the training rows only. With
    ``scale_before_split`` the whole dataset is scaled first.
    """
    split = split_80_20(dataset, seed)
    X = dataset.features
    if scale_before_split:
        params = fit_minmax(X)
    else:
        params = fit_minmax(X[split.train])
    scaled = apply_minmax(params, X)
    return PreparedData(
        X_train=scaled[split.train],
        y_train=dataset.labels[split.train],
        X_test=scaled[split.test],
        y_test=dataset.labels[split.test],
        split=split,
        scaling=params,
        n_classes=dataset.n_classes,
    )
