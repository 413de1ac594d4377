"""PCA and LDA projections used as comparison baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import jacobi_eigh, orient


class BaselineError(ValueError):
    pass


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # k x m, orthonormal rows
    eigenvalues: np.ndarray  # k, descending

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def to_dict(self) -> dict:
        return {
            "kind": "pca",
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        return cls(np.array(d["mean"]), np.array(d["components"]), np.array(d["eigenvalues"]))


@dataclass(frozen=True)
class LdaModel:
    mean: np.ndarray
    class_means: np.ndarray  # C x m
    projection: np.ndarray  # k x m
    eigenvalues: np.ndarray
    regularization: float

    @property
    def n_components(self) -> int:
        return self.projection.shape[0]

    def to_dict(self) -> dict:
        return {
            "kind": "lda",
            "mean": self.mean.tolist(),
            "class_means": self.class_means.tolist(),
            "projection": self.projection.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "regularization": self.regularization,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LdaModel":
        return cls(
            np.array(d["mean"]),
            np.array(d["class_means"]),
            np.array(d["projection"]),
            np.array(d["eigenvalues"]),
            float(d["regularization"]),
        )


def covariance(X: np.ndarray) -> np.ndarray:
    """Covariance with divisor n."""
    Xc = X - X.mean(axis=0)
    return Xc.T @ Xc / X.shape[0]


def pca_fit(train, k: int) -> PcaModel:
    X = np.asarray(train, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise BaselineError("pca_fit needs a non-empty 2-D matrix")
    m = X.shape[1]
    if not 1 <= k <= m:
        raise BaselineError(f"k={k} out of range [1, {m}]")
    values, vectors = jacobi_eigh(covariance(X))
    return PcaModel(X.mean(axis=0), orient(vectors[:, :k].T), values[:k])


def _project(mean, basis, matrix) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != mean.shape[0]:
        raise BaselineError(f"expected {mean.shape[0]} columns, got {X.shape[1]}")
    return (X - mean) @ basis.T


def pca_transform(model: PcaModel, matrix) -> np.ndarray:
    return _project(model.mean, model.components, matrix)


def lda_fit(train, labels, k: int | None = None, n_classes: int | None = None) -> LdaModel:
    """Fisher discriminant directions from the whitened between-class scatter.

    The within-class scatter gets ``eps * I`` added, with
    ``eps = 1e-6 * trace(S_w) / m``. Both scatters are divided by n, which
    leaves the directions unchanged. With identical class means every
    eigenvalue is ~0 and the returned directions carry no information.
    """
    X = np.asarray(train, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    n, m = X.shape
    C = int(n_classes if n_classes is not None else y.max() + 1)
    if C < 2:
        raise BaselineError("LDA needs at least two classes")
    if k is None:
        k = min(C - 1, m)
    if not 1 <= k <= C - 1:
        raise BaselineError(f"k={k} out of range [1, {C - 1}]")
    if k > m:
        raise BaselineError(f"k={k} exceeds feature count {m}")

    mean = X.mean(axis=0)
    class_means = np.zeros((C, m))
    Sw = np.zeros((m, m))
    Sb = np.zeros((m, m))
    for c in range(C):
        Xc = X[y == c]
        if Xc.shape[0] == 0:
            continue
        mu = Xc.mean(axis=0)
        class_means[c] = mu
        D = Xc - mu
        Sw += D.T @ D
        diff = (mu - mean)[:, None]
        Sb += Xc.shape[0] * (diff @ diff.T)
    Sw /= n
    Sb /= n
    eps = 1e-6 * np.trace(Sw) / m
    Sw_reg = Sw + eps * np.eye(m)

    w_vals, w_vecs = jacobi_eigh(Sw_reg)
    if not np.all(w_vals > 0):
        raise BaselineError("within-class scatter is singular even after regularization")
    whiten = w_vecs @ np.diag(1.0 / np.sqrt(w_vals)) @ w_vecs.T
    M = whiten @ Sb @ whiten
    M = (M + M.T) / 2
    tol = 1e-12 * max(1.0, float(np.abs(M).max()))
    vals, vecs = jacobi_eigh(M, tol=tol)
    directions = (whiten @ vecs[:, :k]).T
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    if not np.all(np.isfinite(directions)):
        raise BaselineError("non-finite LDA projection")
    return LdaModel(mean, class_means, orient(directions), vals[:k], float(eps))


def lda_transform(model: LdaModel, matrix) -> np.ndarray:
    return _project(model.mean, model.projection, matrix)
