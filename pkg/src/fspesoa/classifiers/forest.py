"""Random forest of fully grown CART trees (Gini impurity, bootstrap)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._common import ClassifierError, check_matrix

LEAF = -1


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass(frozen=True)
class Tree:
    """Flat binary tree. ``feature == -1`` marks a leaf holding ``value``.

    Rows with ``x[feature] <= threshold`` go to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != LEAF
        while active.any():
            idx = rows[active]
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return self.value[node]

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.array(d["feature"], dtype=np.int64),
            np.array(d["threshold"], dtype=float),
            np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["value"], dtype=np.int64),
        )


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int | None = None  # default floor(sqrt(m))
    seed: int = 0


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    n_features: int
    n_classes: int
    max_features: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "kind": "forest",
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "max_features": self.max_features,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            tuple(Tree.from_dict(t) for t in d["trees"]),
            int(d["n_features"]),
            int(d["n_classes"]),
            int(d["max_features"]),
            int(d["seed"]),
        )


def _best_split(Xn, yn, candidates, n_classes):
    """Best (feature, threshold) over ``candidates`` by weighted Gini.

    Minimising weighted child Gini is the same as maximising
    ``sum(left^2)/n_left + sum(right^2)/n_right`` over class counts.
    Returns None when no candidate feature takes two distinct values.
    """
    n = yn.shape[0]
    onehot = np.eye(n_classes)[yn]
    total = onehot.sum(axis=0)
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    best = None
    best_score = -np.inf
    for f in candidates:
        x = Xn[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            continue
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        sc = (left * left).sum(axis=1) / n_left + (right * right).sum(axis=1) / n_right
        sc[~valid] = -np.inf
        i = int(np.argmax(sc))
        if sc[i] > best_score:
            best_score = sc[i]
            lo, hi = xs[i], xs[i + 1]
            thr = (lo + hi) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (int(f), float(thr))
    return best


def _grow_tree(X, y, n_classes, max_features, rng) -> Tree:
    m = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        yn = y[idx]
        counts = np.bincount(yn, minlength=n_classes)
        value[node] = int(np.argmax(counts))
        if idx.size < 2 or np.count_nonzero(counts) == 1:
            continue
        Xn = X[idx]
        order = rng.permutation(m)
        split = _best_split(Xn, yn, order[:max_features], n_classes)
        if split is None and max_features < m:
            split = _best_split(Xn, yn, order[max_features:], n_classes)
        if split is None:
            continue
        f, thr = split
        mask = Xn[:, f] <= thr
        feature[node] = f
        threshold[node] = thr
        lnode, rnode = new_node(), new_node()
        left[node], right[node] = lnode, rnode
        stack.append((rnode, idx[~mask]))
        stack.append((lnode, idx[mask]))

    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.int64),
    )


def rf_fit(train, labels, config: ForestConfig | None = None, n_classes: int | None = None) -> ForestModel:
    config = config or ForestConfig()
    X = check_matrix(train)
    y = np.asarray(labels, dtype=np.int64)
    n, m = X.shape
    if n == 0:
        raise ClassifierError("empty training set")
    if y.shape != (n,):
        raise ClassifierError("labels must have one entry per training row")
    C = int(n_classes if n_classes is not None else y.max() + 1)
    max_features = config.max_features or max(1, math.isqrt(m))
    max_features = min(max_features, m)
    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng([config.seed, t])
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X[boot], y[boot], C, max_features, rng))
    return ForestModel(tuple(trees), m, C, max_features, config.seed)


def rf_predict(model: ForestModel, test) -> np.ndarray:
    """Majority vote over trees; ties go to the lower class index."""
    T = check_matrix(test, model.n_features)
    votes = np.zeros((T.shape[0], model.n_classes), dtype=np.int64)
    rows = np.arange(T.shape[0])
    for tree in model.trees:
        votes[rows, tree.predict(T)] += 1
    return np.argmax(votes, axis=1)
