"""Penguin-search feature subset selection.

Each penguin sits on one feature index. A dive evaluates the variance of
that (min-max scaled) training column; the colony pools those scores,
rescales them to [0, 1] and every penguin moves to
``floor(scaled_fitness * n_features)``. Oxygen is a shared budget that
drops by a fixed amount per iteration. Features whose scaled score clears
the cutoff form the selected subset.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

OXYGEN_EXHAUSTED = "oxygen_exhausted"
ALL_VISITED = "all_visited"


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class PeSOAConfig:
    """Colony parameters.

    ``strict_position_update`` disables the random jump to an unvisited
    feature that otherwise happens when a penguin's next position has
    already been explored.
    """

    population: int = 10
    initial_oxygen: float = 100.0
    oxygen_decrement: float = 1.0
    cutoff: float = 0.5
    seed: int = 0
    strict_position_update: bool = False
    early_stop_all_visited: bool = True

    def __post_init__(self):
        if int(self.population) != self.population or self.population < 1:
            raise SearchError("population must be a positive integer")
        if not self.initial_oxygen > 0:
            raise SearchError("initial_oxygen must be > 0")
        if not self.oxygen_decrement > 0:
            raise SearchError("oxygen_decrement must be > 0")
        if not 0.0 <= self.cutoff <= 1.0:
            raise SearchError("cutoff must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "PeSOAConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise SearchError(f"unknown PeSOA config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FitnessTable:
    """Per-feature scores shared by the colony.

    ``raw`` and ``scaled`` hold NaN for features nobody has visited yet.
    """

    mean: np.ndarray
    raw: np.ndarray
    scaled: np.ndarray
    visited: np.ndarray

    @classmethod
    def empty(cls, n_features: int) -> "FitnessTable":
        nan = np.full(n_features, np.nan)
        return cls(nan.copy(), nan.copy(), nan.copy(), np.zeros(n_features, dtype=bool))

    @property
    def n_features(self) -> int:
        return self.raw.shape[0]

    def best_feature(self) -> int:
        """Visited feature with the highest raw fitness (lowest index on ties)."""
        if not self.visited.any():
            raise SearchError("no visited features")
        masked = np.where(self.visited, self.raw, -np.inf)
        return int(np.argmax(masked))


class Step(NamedTuple):
    iteration: int
    penguin: int
    position: int
    raw_fitness: float


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    fitness_table: FitnessTable
    trajectory: tuple[Step, ...]
    termination: str
    iterations_run: int
    best_feature: int
    oxygen_history: tuple[float, ...]
    n_evaluations: int
    config: PeSOAConfig = field(default_factory=PeSOAConfig)

    def to_dict(self, feature_names=None) -> dict:
        t = self.fitness_table
        fitness = {}
        for j in np.flatnonzero(t.visited):
            entry = {"mean": float(t.mean[j]), "raw": float(t.raw[j]), "scaled": float(t.scaled[j])}
            if feature_names is not None:
                entry["name"] = feature_names[j]
            fitness[str(int(j))] = entry
        return {
            "selected": list(self.selected),
            "n_features": t.n_features,
            "fitness": fitness,
            "trajectory": [list(s) for s in self.trajectory],
            "termination": self.termination,
            "iterations_run": self.iterations_run,
            "best_feature": self.best_feature,
            "oxygen_history": list(self.oxygen_history),
            "n_evaluations": self.n_evaluations,
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionResult":
        table = FitnessTable.empty(int(d["n_features"]))
        for key, entry in d["fitness"].items():
            j = int(key)
            table.mean[j] = entry["mean"]
            table.raw[j] = entry["raw"]
            table.scaled[j] = entry["scaled"]
            table.visited[j] = True
        return cls(
            selected=tuple(int(j) for j in d["selected"]),
            fitness_table=table,
            trajectory=tuple(Step(int(a), int(b), int(c), float(e)) for a, b, c, e in d["trajectory"]),
            termination=d["termination"],
            iterations_run=int(d["iterations_run"]),
            best_feature=int(d["best_feature"]),
            oxygen_history=tuple(float(o) for o in d["oxygen_history"]),
            n_evaluations=int(d["n_evaluations"]),
            config=PeSOAConfig.from_dict(d["config"]),
        )


def feature_fitness(scaled_train, j: int) -> tuple[float, float]:
    """Mean and population variance (divisor n) of column ``j``."""
    X = np.asarray(scaled_train, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise SearchError("need a 2-D matrix with at least one row")
    col = X[:, j]
    mu = col.mean()
    var = np.mean((col - mu) ** 2)
    return float(mu), float(var)


def scale_fitness(table: FitnessTable) -> FitnessTable:
    """Min-max rescale raw fitness over the visited features.

    When every visited feature has the same raw score they all get 1.0.
    """
    vis = table.visited
    if not vis.any():
        raise SearchError("cannot scale fitness: no visited features")
    raw = table.raw[vis]
    lo, hi = raw.min(), raw.max()
    scaled = np.full(table.n_features, np.nan)
    if hi == lo:
        scaled[vis] = 1.0
    else:
        scaled[vis] = (raw - lo) / (hi - lo)
    return FitnessTable(table.mean.copy(), table.raw.copy(), scaled, vis.copy())


def update_position(f_scaled: float, m: int) -> int:
    """Next feature index: ``floor(f_scaled * m)`` clamped to ``m - 1``."""
    if m < 1:
        raise SearchError("feature count must be >= 1")
    if not 0.0 <= f_scaled <= 1.0:
        raise SearchError(f"scaled fitness {f_scaled!r} outside [0, 1]")
    return min(math.floor(f_scaled * m), m - 1)


def update_oxygen(oxygen: float, d: float) -> float:
    if not d > 0:
        raise SearchError("oxygen decrement must be > 0")
    return oxygen - d


def apply_cutoff(table: FitnessTable, cutoff: float) -> tuple[int, ...]:
    """Visited features whose scaled fitness is at least ``cutoff``.

    Falls back to the single best raw-fitness feature if nothing qualifies.
    """
    if not table.visited.any():
        raise SearchError("empty fitness table")
    ok = table.visited & ~np.isnan(table.scaled)
    ok[ok] = table.scaled[ok] >= cutoff
    chosen = np.flatnonzero(ok)
    if chosen.size == 0:
        return (table.best_feature(),)
    return tuple(int(j) for j in chosen)


def run_pesoa(scaled_train, config: PeSOAConfig | None = None) -> SelectionResult:
    config = config or PeSOAConfig()
    X = np.asarray(scaled_train, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0:
        raise SearchError("need at least one feature")
    m = X.shape[1]
    P = int(config.population)
    rng = np.random.default_rng(config.seed)

    if P <= m:
        positions = rng.choice(m, size=P, replace=False)
    else:
        positions = rng.integers(0, m, size=P)
    positions = [int(p) for p in positions]

    mean = np.full(m, np.nan)
    raw = np.full(m, np.nan)
    visited = np.zeros(m, dtype=bool)
    n_evals = 0
    trajectory: list[Step] = []
    oxygen_history: list[float] = []
    oxygen = float(config.initial_oxygen)
    iteration = 0

    while True:
        iteration += 1
        for pid, pos in enumerate(positions):
            if not visited[pos]:
                mean[pos], raw[pos] = feature_fitness(X, pos)
                visited[pos] = True
                n_evals += 1
            trajectory.append(Step(iteration, pid, pos, float(raw[pos])))

        table = scale_fitness(FitnessTable(mean, raw, np.full(m, np.nan), visited))
        best = table.best_feature()

        unvisited = np.flatnonzero(~visited)
        moved = []
        for pos in positions:
            nxt = update_position(float(table.scaled[pos]), m)
            if visited[nxt] and not config.strict_position_update and unvisited.size:
                nxt = int(rng.choice(unvisited))
            moved.append(nxt)
        positions = moved

        oxygen = update_oxygen(oxygen, config.oxygen_decrement)
        oxygen_history.append(oxygen)
        if oxygen <= 0:
            termination = OXYGEN_EXHAUSTED
            break
        if config.early_stop_all_visited and visited.all():
            termination = ALL_VISITED
            break

    return SelectionResult(
        selected=apply_cutoff(table, config.cutoff),
        fitness_table=table,
        trajectory=tuple(trajectory),
        termination=termination,
        iterations_run=iteration,
        best_feature=best,
        oxygen_history=tuple(oxygen_history),
        n_evaluations=n_evals,
        config=config,
    )
