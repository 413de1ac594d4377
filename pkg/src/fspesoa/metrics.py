"""Confusion-matrix metrics and the FS-PeSOA vs PCA/LDA win/loss table."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

METRICS = ("accuracy", "precision", "recall", "f1")


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)

    def __getitem__(self, key: str) -> float:
        return getattr(self, key)


def confusion(true_labels, predicted, n_classes: int | None = None) -> np.ndarray:
    """Counts with entry ``(t, p)`` = samples of true class t predicted as p."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if t.shape != p.shape:
        raise MetricsError(f"length mismatch: {t.size} true vs {p.size} predicted")
    if t.size == 0:
        raise MetricsError("empty inputs")
    if n_classes is None:
        n_classes = int(max(t.max(), p.max())) + 1
    if t.min() < 0 or p.min() < 0 or t.max() >= n_classes or p.max() >= n_classes:
        raise MetricsError("label outside [0, n_classes)")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def evaluate(cm) -> MetricsReport:
    """Accuracy plus support-weighted precision, recall and F1.

    Empty predicted columns give precision 0; F1 is 0 when precision and
    recall are both 0.
    """
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.size == 0:
        raise MetricsError("confusion matrix must be square and non-empty")
    total = cm.sum()
    if total <= 0:
        raise MetricsError("empty confusion matrix")
    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    w = support / total
    return MetricsReport(
        accuracy=float(tp.sum() / total),
        precision=float(np.dot(w, precision)),
        recall=float(np.dot(w, recall)),
        f1=float(np.dot(w, f1)),
    )


def score(true_labels, predicted, n_classes: int | None = None) -> MetricsReport:
    return evaluate(confusion(true_labels, predicted, n_classes))


# --- win/loss tabulation ------------------------------------------------------

WIN = "Win"


@dataclass(frozen=True)
class WinLossTable:
    cells: dict  # (dataset, classifier) -> {metric: "Win" | ""}
    totals: dict  # metric -> number of wins

    def losses(self, metric: str) -> int:
        return len(self.cells) - self.totals[metric]

    def summary(self, metric: str) -> str:
        return f"{self.totals[metric]}Win/{self.losses(metric)}Loss"


def win_loss(grid: dict, metrics=METRICS) -> WinLossTable:
    """Mark a cell ``Win`` when FS-PeSOA strictly beats both PCA and LDA.

    ``grid`` maps ``(dataset, classifier, metric)`` to a
    ``(pca, lda, fspesoa)`` triple. Every (dataset, classifier) pair that
    appears must carry a triple for every metric.
    """
    pairs = []
    for dataset, classifier, _ in grid:
        if (dataset, classifier) not in pairs:
            pairs.append((dataset, classifier))
    cells = {}
    totals = {m: 0 for m in metrics}
    for pair in pairs:
        row = {}
        for metric in metrics:
            key = (*pair, metric)
            if key not in grid:
                raise MetricsError(f"missing triple for {key}")
            triple = grid[key]
            if triple is None or len(triple) != 3 or any(v is None for v in triple):
                raise MetricsError(f"incomplete triple for {key}: {triple!r}")
            pca, lda, ours = (float(v) for v in triple)
            mark = WIN if ours > pca and ours > lda else ""
            row[metric] = mark
            totals[metric] += mark == WIN
        cells[pair] = row
    return WinLossTable(cells, totals)
