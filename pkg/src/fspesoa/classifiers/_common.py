from __future__ import annotations

import numpy as np


class ClassifierError(ValueError):
    pass


def check_matrix(X, n_columns: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if n_columns == 1 else X[None, :]
    if X.ndim != 2:
        raise ClassifierError("expected a 2-D matrix")
    if n_columns is not None and X.shape[1] != n_columns:
        raise ClassifierError(f"expected {n_columns} columns, got {X.shape[1]}")
    return X


try:
    from numba import njit
except ImportError:  # pragma: no cover - same code runs as plain Python

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
