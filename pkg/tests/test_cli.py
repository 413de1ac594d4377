import json
import subprocess
import sys
from pathlib import Path

import pytest

from fspesoa import __version__
from fspesoa.cli import main
from fspesoa.fetch import bundled_path

CONFIGS = Path(__file__).parents[1] / "configs"
SUBCOMMANDS = ("fetch", "select", "classify", "bench", "report")


@pytest.fixture(autouse=True)
def cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv("FSPESOA_CACHE_DIR", str(tmp_path / "cache"))


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_version_and_help(sub, capsys):
    for flag in ("--version", "--help"):
        with pytest.raises(SystemExit) as e:
            main([sub, flag])
        assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_missing_required_argument():
    with pytest.raises(SystemExit) as e:
        main(["select", "--out", "x.json"])
    assert e.value.code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fspesoa", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout


def test_fetch(tmp_path, capsys):
    assert main(["fetch", "iris", "--bundled", "--cache-dir", str(tmp_path / "c")]) == 0
    assert Path(capsys.readouterr().out.strip()) == tmp_path / "c" / "iris.csv"
    assert main(["fetch", "iris", "--offline", "--cache-dir", str(tmp_path / "c")]) == 0


def test_fetch_offline_cold(tmp_path, capsys):
    assert main(["fetch", "glass", "--offline", "--cache-dir", str(tmp_path / "c")]) == 1
    assert "offline and not cached" in capsys.readouterr().err


def test_select_classify_round_trip(tmp_path, capsys):
    data = str(bundled_path("iris"))
    sel = tmp_path / "sel.json"
    cfg = tmp_path / "pesoa.json"
    cfg.write_text(json.dumps({"population": 4, "cutoff": 0.5}))
    assert main(["select", "--data", data, "--config", str(cfg), "--out", str(sel), "--seed", "3"]) == 0
    doc = json.loads(sel.read_text())
    assert doc["split"] == {"seed": 3, "scale_before_split": False}
    assert doc["config"]["population"] == 4
    assert doc["selected"]

    model = tmp_path / "m.json"
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["classify", "--data", data, "--selection", str(sel), "--classifier", "svm",
                 "--seed", "1", "--model-out", str(model), "--out", str(out1)]) == 0
    assert main(["classify", "--data", data, "--selection", str(sel), "--model-in", str(model),
                 "--out", str(out2)]) == 0
    r1, r2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    assert r1["predictions"] == r2["predictions"]
    assert r1["n_test"] == 30
    assert 0.0 <= r1["metrics"]["accuracy"] <= 1.0


def test_classify_params(tmp_path):
    data = str(bundled_path("wine"))
    sel = tmp_path / "sel.json"
    main(["select", "--data", data, "--out", str(sel)])
    assert main(["classify", "--data", data, "--selection", str(sel), "--classifier", "rf",
                 "--param", "n_trees=5"]) == 0
    assert main(["classify", "--data", data, "--selection", str(sel), "--classifier", "rf",
                 "--param", "n_trees"]) == 2


def test_classify_wrong_data(tmp_path):
    sel = tmp_path / "sel.json"
    main(["select", "--data", str(bundled_path("iris")), "--out", str(sel)])
    assert main(["classify", "--data", str(bundled_path("wine")), "--selection", str(sel),
                 "--classifier", "knn"]) == 2


def test_select_missing_data(tmp_path):
    assert main(["select", "--data", str(tmp_path / "none.csv"), "--out", str(tmp_path / "s.json")]) == 2


def test_bench_and_report(tmp_path):
    out = tmp_path / "run"
    assert main(["bench", "--config", str(CONFIGS / "example.json"), "--out", str(out)]) == 0
    records = sorted((out / "records").glob("*.json"))
    assert len(records) == 2 * 3 * 3 * 2
    for rel in ("tables/results.md", "tables/results.csv", "winloss.md", "figures/iris.svg",
                "figures/wine.svg", "timings.json", "failures.json"):
        assert (out / rel).is_file(), rel
    assert json.loads((out / "failures.json").read_text()) == []

    again = tmp_path / "report"
    assert main(["report", "--records", str(out / "records"), "--out", str(again)]) == 0
    assert (again / "tables/results.csv").read_bytes() == (out / "tables/results.csv").read_bytes()
    assert (again / "winloss.md").read_bytes() == (out / "winloss.md").read_bytes()


def test_bench_failure_exit_code(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"datasets": ["iris"], "selectors": ["lda"], "classifiers": ["knn"],
                               "offline": True, "bundled": False, "cache_dir": str(tmp_path / "empty")}))
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert len(json.loads((tmp_path / "o" / "failures.json").read_text())) == 1


def test_bench_bad_config(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"datasets": ["iris"], "seeds": [1, 1]}))
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg.write_text("{not json")
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_report_empty_dir(tmp_path):
    assert main(["report", "--records", str(tmp_path), "--out", str(tmp_path / "o")]) == 2
