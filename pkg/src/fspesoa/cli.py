"""Command line entry point: fetch, select, classify, bench, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, classifiers
from .bench import SELECTORS, ConfigError, ExperimentConfig, RunRecord, aggregate, run_grid
from .data import DataError, load_csv, prepare
from .fetch import DATASET_NAMES, FetchError, fetch_uci, sha256_hex
from .metrics import score
from .pesoa import PeSOAConfig, SearchError, run_pesoa
from .report import emit_all

log = logging.getLogger("fspesoa")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(path, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"{what} not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path} is not valid JSON: {exc}") from None


def _write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_data(path, label_column=None):
    try:
        return load_csv(path, label_column=label_column, name=Path(path).stem)
    except FileNotFoundError:
        raise UsageError(f"data file not found: {path}") from None


def cmd_fetch(args) -> int:
    path = fetch_uci(args.name, args.cache_dir, offline=args.offline, bundled=args.bundled,
                     url_table=args.url_table)
    print(path)
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = PeSOAConfig()
    if args.config:
        d = _read_json(args.config, "config")
        try:
            cfg = PeSOAConfig.from_dict(d.get("pesoa", d))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad PeSOA config: {exc}") from None
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    ds = _load_data(args.data, args.label_column)
    prepared = prepare(ds, cfg.seed, scale_before_split=args.scale_before_split)
    result = run_pesoa(prepared.X_train, cfg)
    doc = result.to_dict(ds.feature_names)
    # everything classify needs to rebuild the same train/test partition
    doc["split"] = {"seed": cfg.seed, "scale_before_split": args.scale_before_split}
    doc["data"] = {
        "name": ds.name,
        "n_samples": ds.n_samples,
        "sha256": sha256_hex(Path(args.data).read_bytes()),
        "label_column": args.label_column,
    }
    _write_json(args.out, doc)
    names = [ds.feature_names[j] for j in result.selected]
    print(f"{ds.name}: {ds.n_features} -> {len(names)} features {names} ({result.termination}, "
          f"{result.iterations_run} iterations)")
    return EXIT_OK


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def cmd_classify(args) -> int:
    sel = _read_json(args.selection, "selection file")
    try:
        split = sel["split"]
        selected = [int(j) for j in sel["selected"]]
        n_features = int(sel["n_features"])
    except (KeyError, TypeError, ValueError):
        raise UsageError(f"{args.selection} is not a selection file written by 'select'") from None
    ds = _load_data(args.data, sel.get("data", {}).get("label_column"))
    if ds.n_features != n_features:
        raise UsageError(f"selection covers {n_features} features but {args.data} has {ds.n_features}")
    digest = sel.get("data", {}).get("sha256")
    if digest and digest != sha256_hex(Path(args.data).read_bytes()):
        log.warning("data file differs from the one the selection was made on")

    prepared = prepare(ds, int(split["seed"]), scale_before_split=bool(split["scale_before_split"]))
    Xtr, Xte = prepared.X_train[:, selected], prepared.X_test[:, selected]
    if args.model_in:
        model = classifiers.model_from_dict(_read_json(args.model_in, "model file"))
    else:
        if args.classifier is None:
            raise UsageError("--classifier is required unless --model-in is given")
        model = classifiers.fit(args.classifier, Xtr, prepared.y_train, prepared.n_classes,
                                seed=args.seed, params=_parse_params(args.param))
    if args.model_out:
        _write_json(args.model_out, model.to_dict())
    pred = classifiers.predict(model, Xte)
    report = score(prepared.y_test, pred, prepared.n_classes)
    doc = {
        "dataset": ds.name,
        "classifier": args.classifier,
        "seed": args.seed,
        "selected": selected,
        "n_test": int(pred.shape[0]),
        "metrics": report.to_dict(),
        "predictions": pred.tolist(),
    }
    if args.out:
        _write_json(args.out, doc)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def _write_outputs(records, out_dir: Path) -> None:
    bundle = aggregate(records)
    emit_all(bundle, out_dir)


def cmd_bench(args) -> int:
    d = _read_json(args.config, "config")
    try:
        config = ExperimentConfig.from_dict(d)
        if args.workers is not None:
            config = replace(config, workers=args.workers)
        if args.cache_dir is not None:
            config = replace(config, cache_dir=args.cache_dir)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from None
    out = Path(args.out or config.output_dir or "bench-out")
    records_dir = out / "records"
    records_dir.mkdir(parents=True, exist_ok=True)

    records, failures = run_grid(config)
    for r in records:
        (records_dir / r.filename).write_text(r.to_json(), encoding="utf-8")
    _write_json(out / "timings.json", [
        {"dataset": r.dataset, "selector": r.selector, "classifier": r.classifier, "seed": r.seed,
         "wall_time": r.wall_time} for r in records])
    _write_json(out / "failures.json", [vars(f) for f in failures])
    if records:
        _write_outputs(records, out)
    expected = len(config.datasets) * len(config.selectors) * len(config.classifiers) * len(config.seeds)
    print(f"{len(records)}/{expected} runs succeeded, {len(failures)} failed; output in {out}")
    for f in failures:
        print(f"FAILED {f.dataset}/{f.selector}/{f.classifier}/seed{f.seed}: {f.error}", file=sys.stderr)
    return EXIT_FAILURE if failures else EXIT_OK


def _record_order(r: RunRecord):
    def ix(value, known):
        return (known.index(value), "") if value in known else (len(known), value)
    return (ix(r.dataset, DATASET_NAMES), ix(r.selector, SELECTORS),
            ix(r.classifier, classifiers.CLASSIFIERS), r.seed)


def cmd_report(args) -> int:
    src = Path(args.records)
    if not src.is_dir():
        raise UsageError(f"records directory not found: {src}")
    records = []
    for p in sorted(src.glob("*.json")):
        try:
            records.append(RunRecord.from_dict(json.loads(p.read_text(encoding="utf-8"))))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"{p} is not a run record: {exc}") from None
    if not records:
        raise UsageError(f"no run records in {src}")
    records.sort(key=_record_order)
    _write_outputs(records, Path(args.out))
    print(f"aggregated {len(records)} records into {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    version = f"%(prog)s {__version__}"
    parser = argparse.ArgumentParser(prog="fspesoa", description="Penguin-search feature selection toolkit.")
    parser.add_argument("--version", action="version", version=version)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--version", action="version", version=version)
        return p

    p = add("fetch", "download (or seed from the bundled snapshot) one dataset into the cache")
    p.add_argument("name", choices=DATASET_NAMES)
    p.add_argument("--cache-dir", help="cache directory (default: $FSPESOA_CACHE_DIR or ~/.cache/fspesoa)")
    p.add_argument("--offline", action="store_true", help="never touch the network; require a cache hit")
    p.add_argument("--bundled", action="store_true", help="fill a cache miss from the packaged snapshot")
    p.add_argument("--url-table", help="JSON file overriding the download URLs")
    p.set_defaults(func=cmd_fetch)

    p = add("select", "run FS-PeSOA on the training split of a CSV and save the selection")
    p.add_argument("--data", required=True, help="canonical CSV file")
    p.add_argument("--config", help="JSON with PeSOA settings (bare or under a 'pesoa' key)")
    p.add_argument("--out", required=True, help="selection JSON to write")
    p.add_argument("--seed", type=int, help="search and split seed (overrides the config)")
    p.add_argument("--label-column", help="label column name (default: last column)")
    p.add_argument("--scale-before-split", action="store_true",
                   help="fit min-max scaling on all rows instead of the training rows")
    p.set_defaults(func=cmd_select)

    p = add("classify", "train and score a classifier on a saved selection")
    p.add_argument("--data", required=True)
    p.add_argument("--selection", required=True, help="JSON written by 'select'")
    p.add_argument("--classifier", choices=classifiers.CLASSIFIERS)
    p.add_argument("--seed", type=int, default=0, help="classifier seed")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="classifier hyperparameter, e.g. k=3, n_trees=50, lam=0.01, epochs=100")
    p.add_argument("--model-out", help="save the fitted model as JSON")
    p.add_argument("--model-in", help="load a saved model instead of fitting")
    p.add_argument("--out", help="write metrics and predictions as JSON")
    p.set_defaults(func=cmd_classify)

    p = add("bench", "run an experiment grid and write records, tables and figures")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", help="output directory (default: config output_dir)")
    p.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    p.add_argument("--cache-dir", help="dataset cache directory (overrides the config)")
    p.set_defaults(func=cmd_bench)

    p = add("report", "aggregate existing run records into tables and figures")
    p.add_argument("--records", required=True, help="directory of run record JSON files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"fspesoa {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FetchError, SearchError, classifiers.ClassifierError, OSError, ValueError) as exc:
        print(f"fspesoa {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
