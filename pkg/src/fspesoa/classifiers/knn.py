"""k-nearest-neighbour classifier (Euclidean, majority vote)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import ClassifierError, check_matrix


@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    def to_dict(self) -> dict:
        return {"kind": "knn", "k": self.k, "n_classes": self.n_classes,
                "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        return cls(np.array(d["X"], dtype=float).reshape(len(d["y"]), -1),
                   np.array(d["y"], dtype=np.int64), int(d["k"]), int(d["n_classes"]))


def knn_fit(train, labels, k: int = 5, n_classes: int | None = None) -> KnnModel:
    X = check_matrix(train)
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (X.shape[0],):
        raise ClassifierError("labels must have one entry per training row")
    if k < 1:
        raise ClassifierError("k must be >= 1")
    if k > X.shape[0]:
        raise ClassifierError(f"k={k} exceeds the {X.shape[0]} training rows")
    C = int(n_classes if n_classes is not None else y.max() + 1)
    return KnnModel(X.copy(), y.copy(), int(k), C)


def knn_predict(model: KnnModel, test, batch: int = 256) -> np.ndarray:
    """Vote among the k closest training rows.

    Equal distances favour the lower training index; equal vote counts
    favour the lower class index.
    """
    T = check_matrix(test, model.X.shape[1])
    out = np.empty(T.shape[0], dtype=np.int64)
    for start in range(0, T.shape[0], batch):
        chunk = T[start:start + batch]
        d2 = ((chunk[:, None, :] - model.X[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
        votes = model.y[nearest]
        for i, row in enumerate(votes):
            out[start + i] = np.argmax(np.bincount(row, minlength=model.n_classes))
    return out
