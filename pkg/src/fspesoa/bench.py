"""Run the (dataset x selector x classifier x seed) grid and aggregate it."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import classifiers
from .baselines import lda_fit, lda_transform, pca_fit, pca_transform
from .data import load_csv, prepare
from .fetch import DATASET_NAMES, fetch_uci
from .metrics import METRICS, MetricsReport, WinLossTable, score, win_loss
from .pesoa import PeSOAConfig, run_pesoa

log = logging.getLogger(__name__)

SELECTORS = ("fspesoa", "pca", "lda", "none")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...]
    selectors: tuple[str, ...] = ("fspesoa", "pca", "lda")
    classifiers: tuple[str, ...] = ("knn", "rf", "svm")
    seeds: tuple[int, ...] = (0,)
    pesoa: PeSOAConfig = field(default_factory=PeSOAConfig)
    classifier_params: dict = field(default_factory=dict)
    # None: as many components as FS-PeSOA selected (LDA capped at C-1)
    n_components: int | None = None
    scale_before_split: bool = False
    cache_dir: str | None = None
    offline: bool = False
    bundled: bool = True
    url_table: str | None = None
    data_files: dict = field(default_factory=dict)
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        for name, values in (("datasets", self.datasets), ("selectors", self.selectors),
                             ("classifiers", self.classifiers), ("seeds", self.seeds)):
            if not values:
                raise ConfigError(f"{name} must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        bad = set(self.selectors) - set(SELECTORS)
        if bad:
            raise ConfigError(f"unknown selectors: {sorted(bad)}")
        bad = set(self.classifiers) - set(classifiers.CLASSIFIERS)
        if bad:
            raise ConfigError(f"unknown classifiers: {sorted(bad)}")
        bad = set(self.datasets) - set(DATASET_NAMES) - set(self.data_files)
        if bad:
            raise ConfigError(f"unknown datasets (no data_files entry): {sorted(bad)}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d.pop("$schema", None)
        d.pop("description", None)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("datasets", "selectors", "classifiers"):
            if key in d:
                d[key] = tuple(d[key])
        if "seeds" in d:
            d["seeds"] = tuple(int(s) for s in d["seeds"])
        if "pesoa" in d:
            d["pesoa"] = PeSOAConfig.from_dict(d["pesoa"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pesoa"] = self.pesoa.to_dict()
        for key in ("datasets", "selectors", "classifiers", "seeds"):
            d[key] = list(d[key])
        return d


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    selector: str
    classifier: str
    seed: int
    n_features: int
    n_selected: int
    selected: tuple[int, ...] | None
    metrics: MetricsReport
    wall_time: float = 0.0

    @property
    def key(self) -> tuple:
        return (self.dataset, self.selector, self.classifier)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "dataset": self.dataset,
            "selector": self.selector,
            "classifier": self.classifier,
            "seed": self.seed,
            "n_features": self.n_features,
            "n_selected": self.n_selected,
            "selected": None if self.selected is None else list(self.selected),
            "metrics": self.metrics.to_dict(),
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            dataset=d["dataset"],
            selector=d["selector"],
            classifier=d["classifier"],
            seed=int(d["seed"]),
            n_features=int(d["n_features"]),
            n_selected=int(d["n_selected"]),
            selected=None if d.get("selected") is None else tuple(d["selected"]),
            metrics=MetricsReport(**d["metrics"]),
            wall_time=float(d.get("wall_time", 0.0)),
        )

    @property
    def filename(self) -> str:
        return f"{self.dataset}__{self.selector}__{self.classifier}__seed{self.seed}.json"


@dataclass(frozen=True)
class Failure:
    dataset: str
    selector: str
    classifier: str
    seed: int
    error: str


def dataset_path(config: ExperimentConfig, name: str) -> Path:
    if name in config.data_files:
        return Path(config.data_files[name])
    return fetch_uci(
        name,
        config.cache_dir,
        offline=config.offline,
        bundled=config.bundled,
        url_table=config.url_table,
    )


def _select(selector, prepared, selected, n_components):
    """Project train/test for one selector. Returns (X_train, X_test, n_kept, kept_indices)."""
    Xtr, Xte = prepared.X_train, prepared.X_test
    if selector == "none":
        return Xtr, Xte, Xtr.shape[1], tuple(range(Xtr.shape[1]))
    if selector == "fspesoa":
        cols = list(selected)
        return Xtr[:, cols], Xte[:, cols], len(cols), tuple(selected)
    k = n_components if n_components is not None else len(selected)
    if selector == "pca":
        k = min(k, Xtr.shape[1])
        model = pca_fit(Xtr, k)
        return pca_transform(model, Xtr), pca_transform(model, Xte), k, None
    if selector == "lda":
        k = min(k, prepared.n_classes - 1, Xtr.shape[1])
        model = lda_fit(Xtr, prepared.y_train, k, n_classes=prepared.n_classes)
        return lda_transform(model, Xtr), lda_transform(model, Xte), k, None
    raise ConfigError(f"unknown selector {selector!r}")


def run_cell(config: ExperimentConfig, dataset: str, seed: int):
    """All selector/classifier combinations for one (dataset, seed)."""
    records, failures = [], []
    combos = [(s, c) for s in config.selectors for c in config.classifiers]
    try:
        ds = load_csv(dataset_path(config, dataset), name=dataset)
        prepared = prepare(ds, seed, scale_before_split=config.scale_before_split)
        selection = run_pesoa(prepared.X_train, replace(config.pesoa, seed=seed))
    except Exception as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [], [Failure(dataset, s, c, seed, msg) for s, c in combos]

    for selector in config.selectors:
        t0 = time.perf_counter()
        try:
            Xtr, Xte, n_kept, kept = _select(selector, prepared, selection.selected, config.n_components)
        except Exception as exc:
            msg = f"{type(exc).__name__}: {exc}"
            failures.extend(Failure(dataset, selector, c, seed, msg) for c in config.classifiers)
            continue
        select_time = time.perf_counter() - t0
        for clf in config.classifiers:
            t1 = time.perf_counter()
            try:
                model = classifiers.fit(clf, Xtr, prepared.y_train, prepared.n_classes, seed=seed,
                                        params=config.classifier_params.get(clf))
                pred = classifiers.predict(model, Xte)
                metrics = score(prepared.y_test, pred, prepared.n_classes)
            except Exception as exc:
                failures.append(Failure(dataset, selector, clf, seed, f"{type(exc).__name__}: {exc}"))
                continue
            records.append(RunRecord(
                dataset=dataset,
                selector=selector,
                classifier=clf,
                seed=seed,
                n_features=ds.n_features,
                n_selected=n_kept,
                selected=kept,
                metrics=metrics,
                wall_time=select_time + time.perf_counter() - t1,
            ))
    return records, failures


def _order_key(config: ExperimentConfig):
    d_ix = {d: i for i, d in enumerate(config.datasets)}
    s_ix = {s: i for i, s in enumerate(config.selectors)}
    c_ix = {c: i for i, c in enumerate(config.classifiers)}

    def key(r):
        return (d_ix[r.dataset], s_ix[r.selector], c_ix[r.classifier], r.seed)

    return key


def run_grid(config: ExperimentConfig) -> tuple[list[RunRecord], list[Failure]]:
    """Evaluate every combination; failures are collected, not raised.

    Output order is fixed by the config regardless of worker count.
    """
    jobs = [(d, s) for d in config.datasets for s in config.seeds]
    # fetch up front so workers only ever see cache hits
    for d in config.datasets:
        if d in config.data_files:
            continue
        try:
            dataset_path(config, d)
        except Exception as exc:
            log.warning("fetch failed for %s: %s", d, exc)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run_cell, [config] * len(jobs), *zip(*jobs)))
    else:
        results = [run_cell(config, d, s) for d, s in jobs]
    records = [r for recs, _ in results for r in recs]
    failures = [f for _, fails in results for f in fails]
    key = _order_key(config)
    records.sort(key=key)
    failures.sort(key=key)
    return records, failures


# --- aggregation --------------------------------------------------------------


@dataclass(frozen=True)
class Aggregate:
    dataset: str
    selector: str
    classifier: str
    n_seeds: int
    n_features: int
    n_selected: float  # median over seeds
    median: dict
    minimum: dict
    maximum: dict


@dataclass(frozen=True)
class ReportBundle:
    aggregates: tuple[Aggregate, ...]
    winloss: WinLossTable | None

    def get(self, dataset, selector, classifier) -> Aggregate:
        for a in self.aggregates:
            if (a.dataset, a.selector, a.classifier) == (dataset, selector, classifier):
                return a
        raise KeyError((dataset, selector, classifier))


def aggregate(records) -> ReportBundle:
    """Median and min/max over seeds for every combination.

    The win/loss table is attached when FS-PeSOA, PCA and LDA results
    exist for the same (dataset, classifier) cells.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.key, []).append(r)
    aggs = []
    for key, recs in groups.items():
        values = {m: np.array([r.metrics[m] for r in recs]) for m in METRICS}
        aggs.append(Aggregate(
            dataset=key[0],
            selector=key[1],
            classifier=key[2],
            n_seeds=len(recs),
            n_features=recs[0].n_features,
            n_selected=float(np.median([r.n_selected for r in recs])),
            median={m: float(np.median(v)) for m, v in values.items()},
            minimum={m: float(v.min()) for m, v in values.items()},
            maximum={m: float(v.max()) for m, v in values.items()},
        ))

    grid = {}
    for dataset, _, classifier in groups:
        trio = [(dataset, s, classifier) for s in ("pca", "lda", "fspesoa")]
        if all(k in groups for k in trio):
            for m in METRICS:
                grid[(dataset, classifier, m)] = tuple(
                    next(a for a in aggs if (a.dataset, a.selector, a.classifier) == k).median[m]
                    for k in trio
                )
    return ReportBundle(tuple(aggs), win_loss(grid) if grid else None)
