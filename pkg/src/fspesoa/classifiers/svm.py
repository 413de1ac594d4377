"""One-vs-rest linear SVM trained with Pegasos stochastic subgradient steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import ClassifierError, check_matrix, njit


@dataclass(frozen=True)
class SvmConfig:
    lam: float = 1e-3
    epochs: int = 200
    seed: int = 0


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray  # C x m
    bias: np.ndarray  # C
    lam: float
    epochs: int
    seed: int
    objective_history: tuple[float, ...] = ()

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    def decision_function(self, X) -> np.ndarray:
        X = check_matrix(X, self.weights.shape[1])
        return X @ self.weights.T + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": "svm",
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "lam": self.lam,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(np.array(d["weights"], dtype=float), np.array(d["bias"], dtype=float),
                   float(d["lam"]), int(d["epochs"]), int(d["seed"]))


def hinge_objective(W, X, Y, lam: float) -> float:
    """Sum over classes of ``lam/2 |w|^2 + mean hinge``; W includes the bias column."""
    margins = Y * (X @ W.T)
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0)
    return float((0.5 * lam * (W * W).sum(axis=1) + hinge).sum())


@njit(cache=True)
def _pegasos_epoch(W, Xa, Y, order, lam, t):
    """One pass over ``order``, updating W in place; returns the step count."""
    C, d = W.shape
    for i in order:
        t += 1
        shrink = 1.0 - 1.0 / t
        eta = 1.0 / (lam * t)
        for c in range(C):
            s = 0.0
            for j in range(d):
                s += W[c, j] * Xa[i, j]
            violated = Y[i, c] * s < 1.0
            for j in range(d):
                W[c, j] *= shrink
                if violated:
                    W[c, j] += eta * Y[i, c] * Xa[i, j]
    return t


def svm_fit(train, labels, config: SvmConfig | None = None, n_classes: int | None = None) -> SvmModel:
    """Train all one-vs-rest machines together over one shuffled sample order.

    Step ``t`` uses learning rate ``1 / (lam * t)``. The bias is learned as
    the weight of a constant input of 1, so it is regularised like the
    other weights.
    """
    config = config or SvmConfig()
    if config.lam <= 0 or config.epochs < 1:
        raise ClassifierError("need lam > 0 and epochs >= 1")
    X = check_matrix(train)
    y = np.asarray(labels, dtype=np.int64)
    n, m = X.shape
    if y.shape != (n,):
        raise ClassifierError("labels must have one entry per training row")
    C = int(n_classes if n_classes is not None else y.max() + 1)
    if C < 2:
        raise ClassifierError("need at least two classes")
    present = np.bincount(y, minlength=C)
    if np.any(present == 0):
        raise ClassifierError(f"class {int(np.argmin(present))} has no training examples")

    Xa = np.hstack([X, np.ones((n, 1))])
    Y = np.where(y[:, None] == np.arange(C)[None, :], 1.0, -1.0)  # n x C
    W = np.zeros((C, m + 1))
    rng = np.random.default_rng(config.seed)
    t = 0
    history = []
    for _ in range(config.epochs):
        t = _pegasos_epoch(W, Xa, Y, rng.permutation(n), config.lam, t)
        history.append(hinge_objective(W, Xa, Y, config.lam))
    return SvmModel(W[:, :m].copy(), W[:, m].copy(), config.lam, config.epochs, config.seed, tuple(history))


def svm_predict(model: SvmModel, test) -> np.ndarray:
    """Class with the largest score; ties go to the lower index."""
    return np.argmax(model.decision_function(test), axis=1)
