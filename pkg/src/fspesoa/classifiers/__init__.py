"""From-scratch classifiers used to score a selected feature subset."""

from __future__ import annotations

from ._common import ClassifierError
from .forest import ForestConfig, ForestModel, gini, rf_fit, rf_predict
from .knn import KnnModel, knn_fit, knn_predict
from .svm import SvmConfig, SvmModel, svm_fit, svm_predict

CLASSIFIERS = ("knn", "rf", "svm")

__all__ = [
    "CLASSIFIERS",
    "ClassifierError",
    "ForestConfig",
    "ForestModel",
    "KnnModel",
    "SvmConfig",
    "SvmModel",
    "fit",
    "gini",
    "knn_fit",
    "knn_predict",
    "model_from_dict",
    "predict",
    "rf_fit",
    "rf_predict",
    "svm_fit",
    "svm_predict",
]


def fit(name: str, X, y, n_classes: int, seed: int = 0, params: dict | None = None):
    """Fit classifier ``name`` with optional hyperparameter overrides."""
    params = dict(params or {})
    if name == "knn":
        return knn_fit(X, y, k=int(params.get("k", 5)), n_classes=n_classes)
    if name == "rf":
        cfg = ForestConfig(
            n_trees=int(params.get("n_trees", 100)),
            max_features=params.get("max_features"),
            seed=seed,
        )
        return rf_fit(X, y, cfg, n_classes=n_classes)
    if name == "svm":
        cfg = SvmConfig(lam=float(params.get("lam", 1e-3)), epochs=int(params.get("epochs", 200)), seed=seed)
        return svm_fit(X, y, cfg, n_classes=n_classes)
    raise ClassifierError(f"unknown classifier {name!r}")


def predict(model, X):
    if isinstance(model, KnnModel):
        return knn_predict(model, X)
    if isinstance(model, ForestModel):
        return rf_predict(model, X)
    if isinstance(model, SvmModel):
        return svm_predict(model, X)
    raise ClassifierError(f"not a classifier model: {type(model).__name__}")


def model_from_dict(d: dict):
    kinds = {"knn": KnnModel, "forest": ForestModel, "svm": SvmModel}
    try:
        return kinds[d["kind"]].from_dict(d)
    except KeyError:
        raise ClassifierError(f"unknown model kind {d.get('kind')!r}") from None
