import csv
import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fspesoa.bench import (
    ConfigError,
    ExperimentConfig,
    RunRecord,
    aggregate,
    run_grid,
)
from fspesoa.data import Dataset, write_csv
from fspesoa.metrics import METRICS, MetricsReport, WinLossTable
from fspesoa.report import (
    emit_all,
    emit_csv,
    emit_markdown,
    parse_winloss_markdown,
    results_csv,
    svg_bars,
    winloss_markdown,
)


def config(tmp_path, **kw):
    base = dict(datasets=("iris",), selectors=("fspesoa",), classifiers=("knn",), seeds=(0,),
                cache_dir=str(tmp_path / "cache"))
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def record(dataset="d", selector="fspesoa", classifier="knn", seed=0, acc=0.5, n_sel=2):
    return RunRecord(dataset, selector, classifier, seed, 4, n_sel, None,
                     MetricsReport(acc, acc, acc, acc))


# --- config -----------------------------------------------------------------------------


@pytest.mark.parametrize("kw", [
    {"seeds": ()}, {"seeds": (1, 1)}, {"selectors": ("ica",)}, {"classifiers": ("mlp",)},
    {"datasets": ("mnist",)}, {"workers": 0},
])
def test_config_invariants(tmp_path, kw):
    with pytest.raises(ConfigError):
        config(tmp_path, **kw)


def test_config_unknown_key(tmp_path):
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_dict({"datasets": ["iris"], "sedes": [1]})


def test_config_round_trip(tmp_path):
    cfg = config(tmp_path, seeds=(3, 1), pesoa={"cutoff": 0.3})
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_shipped_configs_load():
    from pathlib import Path
    root = Path(__file__).parents[1] / "configs"
    grid = ExperimentConfig.load(root / "full_grid.json")
    assert len(grid.datasets) * len(grid.selectors) * len(grid.classifiers) * len(grid.seeds) == 840
    ExperimentConfig.load(root / "example.json")


# --- run_grid -----------------------------------------------------------------------------


def test_three_seeds_three_records(tmp_path):
    records, failures = run_grid(config(tmp_path, seeds=(0, 1, 2)))
    assert len(records) == 3 and not failures
    assert [r.seed for r in records] == [0, 1, 2]


def test_none_selector_keeps_all_iris_features(tmp_path):
    records, _ = run_grid(config(tmp_path, selectors=("none",)))
    assert records[0].n_selected == 4


def test_json_deterministic(tmp_path):
    cfg = config(tmp_path, selectors=("fspesoa", "pca", "lda"), classifiers=("knn", "rf", "svm"),
                 classifier_params={"rf": {"n_trees": 5}})
    a, _ = run_grid(cfg)
    b, _ = run_grid(cfg)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    assert "wall_time" not in a[0].to_json()


def test_parallel_matches_serial(tmp_path):
    cfg = config(tmp_path, datasets=("iris", "wine"), selectors=("fspesoa", "lda"), seeds=(0, 1))
    serial, _ = run_grid(cfg)
    parallel, _ = run_grid(ExperimentConfig.from_dict({**cfg.to_dict(), "workers": 2}))
    assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]


def test_lda_capped_and_pca_follows_selection(tmp_path):
    records, _ = run_grid(config(tmp_path, datasets=("wine",), selectors=("fspesoa", "pca", "lda")))
    by = {r.selector: r for r in records}
    assert by["pca"].n_selected == by["fspesoa"].n_selected
    assert by["lda"].n_selected <= 2


def test_fail_soft(tmp_path):
    # one class with a single sample cannot be split, the other dataset still runs
    bad = Dataset(np.arange(6.0)[:, None], np.array([0, 0, 0, 0, 0, 1]), ("x",), ("a", "b"), "bad")
    write_csv(bad, tmp_path / "bad.csv")
    cfg = config(tmp_path, datasets=("bad", "iris"), classifiers=("knn", "svm"),
                 data_files={"bad": str(tmp_path / "bad.csv")})
    records, failures = run_grid(cfg)
    assert len(records) == 2 and len(failures) == 2
    assert {f.dataset for f in failures} == {"bad"}
    assert "class" in failures[0].error


def test_offline_cold_cache_fails_soft(tmp_path):
    cfg = config(tmp_path, offline=True, bundled=False)
    records, failures = run_grid(cfg)
    assert not records and "offline" in failures[0].error


def test_record_round_trip():
    r = record()
    assert RunRecord.from_dict(r.to_dict()) == r
    assert r.filename == "d__fspesoa__knn__seed0.json"


# --- aggregate ---------------------------------------------------------------------------


def test_aggregate_single_seed():
    bundle = aggregate([record(acc=0.7)])
    a = bundle.get("d", "fspesoa", "knn")
    assert a.median["accuracy"] == a.minimum["accuracy"] == a.maximum["accuracy"] == 0.7


def test_aggregate_median():
    bundle = aggregate([record(seed=s, acc=v) for s, v in enumerate([0.6, 0.9, 0.8])])
    a = bundle.get("d", "fspesoa", "knn")
    assert a.median["accuracy"] == 0.8
    assert (a.minimum["accuracy"], a.maximum["accuracy"]) == (0.6, 0.9)
    assert bundle.winloss is None


def test_aggregate_empty():
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_win_loss():
    recs = [record(selector=s, acc=v) for s, v in (("pca", 0.5), ("lda", 0.6), ("fspesoa", 0.7))]
    bundle = aggregate(recs)
    assert bundle.winloss.totals["accuracy"] == 1


# --- emitters ---------------------------------------------------------------------------


def grid_bundle():
    recs = [record(dataset=d, selector=s, classifier=c, acc=0.1 * (i % 9) + 0.05)
            for i, (d, s, c) in enumerate((d, s, c) for d in ("x", "y") for s in ("fspesoa", "pca", "lda")
                                          for c in ("knn", "rf", "svm"))]
    return aggregate(recs)


def test_one_combination_one_row(tmp_path):
    paths = emit_markdown(aggregate([record()]), tmp_path)
    table = paths[0].read_text()
    assert sum(1 for line in table.splitlines() if line.startswith("| d ")) == 1


def test_csv_rows():
    bundle = grid_bundle()
    rows = list(csv.DictReader(io.StringIO(results_csv(bundle))))
    assert len(rows) == len(bundle.aggregates) * 4
    assert {r["metric"] for r in rows} == set(METRICS)


def test_svg_well_formed_with_nine_bars_per_group():
    root = ET.fromstring(svg_bars(grid_bundle(), "x"))
    ns = "{http://www.w3.org/2000/svg}"
    bars = [r for r in root.iter(f"{ns}rect") if r.find(f"{ns}title") is not None]
    assert len(bars) == 9 * 4


def test_emit_all_layout(tmp_path):
    emit_all(grid_bundle(), tmp_path)
    for rel in ("tables/results.md", "tables/results.csv", "tables/ranges.md", "winloss.md",
                "figures/x.svg", "figures/y.svg"):
        assert (tmp_path / rel).is_file(), rel


def test_winloss_markdown_round_trip():
    table = grid_bundle().winloss
    assert parse_winloss_markdown(winloss_markdown(table)) == table.cells


def test_winloss_markdown_flags_reference_differences():
    table = grid_bundle().winloss
    key = next(iter(table.cells))
    flipped = {k: dict(v) for k, v in table.cells.items()}
    flipped[key]["recall"] = "" if flipped[key]["recall"] else "Win"
    totals = dict(table.totals, recall=table.totals["recall"] + (1 if flipped[key]["recall"] else -1))
    text = winloss_markdown(table, WinLossTable(flipped, totals))
    assert text.count("differs") == 1
    diff_rows = text.split("Cells that differ")[1].strip().splitlines()[4:]
    assert len(diff_rows) == 1 and key[0] in diff_rows[0] and "Recall" in diff_rows[0]
    assert parse_winloss_markdown(text) == table.cells


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_csv(aggregate([record()]), blocker / "sub")
