"""Download the seven benchmark datasets and cache them as canonical CSV.

Cache layout is ``<cache_dir>/<name>.csv`` plus ``<name>.sha256`` holding
the hex digest of the CSV bytes. A cached file whose digest no longer
matches is an error, never silently refetched.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import urllib.request
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
from filelock import FileLock

from .data import Dataset, DataError, dataset_to_csv

log = logging.getLogger(__name__)

DATASET_NAMES = ("iris", "glass", "ion", "pima", "vehicle", "wine", "wisconsin")
CACHE_ENV = "FSPESOA_CACHE_DIR"


class FetchError(RuntimeError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "fspesoa"


def _bundle_file(fname: str):
    return resources.files("fspesoa").joinpath("datasets", fname)


def load_url_table(path=None) -> dict:
    if path is None:
        text = _bundle_file("sources.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    table = json.loads(text)
    return {k: v for k, v in table.items() if not k.startswith("_")}


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _canonical_header(name: str) -> list[str]:
    first = _bundle_file(f"{name}.csv").read_text(encoding="utf-8").split("\n", 1)[0]
    return first.split(",")[:-1]


# --- source format converters -------------------------------------------------


def _rows(text: str, sep: str | None = ","):
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split(sep) if sep else line.split()
        yield [p.strip() for p in parts]


def _build(name: str, feats: list[list[str]], labels: list[str]) -> Dataset:
    header = _canonical_header(name)
    try:
        X = np.array([[float(v) for v in row] for row in feats])
    except ValueError as exc:
        raise DataError(f"{name}: non-numeric value in source ({exc})") from None
    if X.ndim != 2 or X.shape[1] != len(header):
        raise DataError(f"{name}: expected {len(header)} features, got {X.shape[-1]}")
    classes: dict[str, int] = {}
    y = [classes.setdefault(lab, len(classes)) for lab in labels]
    return Dataset(X, np.array(y), tuple(header), tuple(classes), name)


def _convert_iris(texts):
    rows = [r for t in texts for r in _rows(t)]
    return _build("iris", [r[:4] for r in rows], [r[4].removeprefix("Iris-") for r in rows])


_GLASS_TYPES = {
    "1": "building_windows_float_processed",
    "2": "building_windows_non_float_processed",
    "3": "vehicle_windows_float_processed",
    "4": "vehicle_windows_non_float_processed",
    "5": "containers",
    "6": "tableware",
    "7": "headlamps",
}


def _convert_glass(texts):
    # the Id column is kept as a feature
    rows = [r for t in texts for r in _rows(t)]
    return _build("glass", [r[:10] for r in rows], [_GLASS_TYPES[r[10]] for r in rows])


def _convert_ion(texts):
    # attribute 2 is identically zero in the source and is dropped
    rows = [r for t in texts for r in _rows(t)]
    feats = [[v for j, v in enumerate(r[:34]) if j != 1] for r in rows]
    return _build("ion", feats, [{"g": "good", "b": "bad"}[r[34]] for r in rows])


def _convert_pima(texts):
    rows = [r for t in texts for r in _rows(t)]
    names = {"0": "tested_negative", "1": "tested_positive"}
    return _build("pima", [r[:8] for r in rows], [names.get(r[8], r[8]) for r in rows])


def _convert_vehicle(texts):
    rows = [r for t in texts for r in _rows(t, sep=None)]
    return _build("vehicle", [r[:18] for r in rows], [r[18].lower() for r in rows])


def _convert_wine(texts):
    rows = [r for t in texts for r in _rows(t)]
    return _build("wine", [r[1:] for r in rows], [f"class_{int(r[0]) - 1}" for r in rows])


def _convert_wisconsin(texts):
    rows = [r for t in texts for r in _rows(t)]
    names = {"M": "malignant", "B": "benign"}
    return _build("wisconsin", [r[2:] for r in rows], [names[r[1]] for r in rows])


CONVERTERS: dict[str, Callable[[list[str]], Dataset]] = {
    "iris": _convert_iris,
    "glass": _convert_glass,
    "ion": _convert_ion,
    "pima": _convert_pima,
    "vehicle": _convert_vehicle,
    "wine": _convert_wine,
    "wisconsin": _convert_wisconsin,
}


def _urlopen(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


# --- cache ----------------------------------------------------------------------


def _check_name(name: str) -> None:
    if name not in DATASET_NAMES:
        raise FetchError(f"unknown dataset {name!r}; expected one of {', '.join(DATASET_NAMES)}")


def _verify_cached(csv_path: Path, digest_path: Path) -> None:
    if not digest_path.exists():
        raise FetchError(f"{csv_path} has no recorded digest ({digest_path.name} missing)")
    recorded = digest_path.read_text(encoding="utf-8").split()[0]
    actual = sha256_hex(csv_path.read_bytes())
    if recorded != actual:
        raise FetchError(
            f"checksum mismatch for {csv_path}: recorded {recorded}, actual {actual}"
        )


def _store(data: bytes, csv_path: Path, digest_path: Path) -> None:
    tmp = csv_path.with_suffix(".csv.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, csv_path)
    digest_path.write_text(f"{sha256_hex(data)}  {csv_path.name}\n", encoding="utf-8")


def bundled_digest(name: str) -> str:
    manifest = json.loads(_bundle_file("manifest.json").read_text(encoding="utf-8"))
    return manifest[name]["sha256"]


def bundled_path(name: str) -> Path:
    """Path of the snapshot shipped with the package (read-only)."""
    _check_name(name)
    return Path(str(_bundle_file(f"{name}.csv")))


def fetch_uci(
    name: str,
    cache_dir=None,
    *,
    offline: bool = False,
    bundled: bool = False,
    url_table: dict | str | Path | None = None,
    opener: Callable[[str], bytes] | None = None,
) -> Path:
    """Return a local canonical CSV for ``name``, downloading on cache miss.

    ``offline`` forbids any download and requires a cache hit. ``bundled``
    fills a cache miss from the snapshot shipped with the package instead
    of the network. ``opener`` replaces ``urllib`` for fetching a URL.
    """
    _check_name(name)
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    csv_path = cache / f"{name}.csv"
    digest_path = cache / f"{name}.sha256"

    with FileLock(str(cache / f".{name}.lock")):
        if csv_path.exists():
            _verify_cached(csv_path, digest_path)
            return csv_path

        if bundled:
            data = bundled_path(name).read_bytes()
            expected = bundled_digest(name)
            if sha256_hex(data) != expected:
                raise FetchError(f"bundled snapshot for {name} fails its checksum")
            _store(data, csv_path, digest_path)
            log.info("seeded %s from bundled snapshot", csv_path)
            return csv_path

        if offline:
            raise FetchError(f"{name}: offline and not cached in {cache}")

        if not isinstance(url_table, dict):
            url_table = load_url_table(url_table)
        try:
            entry = url_table[name]
        except KeyError:
            raise FetchError(f"no URL entry for {name!r}") from None
        urls = entry["urls"] if "urls" in entry else [entry["url"]]
        digests = entry.get("sha256") or [None] * len(urls)
        if isinstance(digests, str):
            digests = [digests]
        fetch = opener or _urlopen
        texts = []
        for url, want in zip(urls, digests):
            try:
                raw = fetch(url)
            except Exception as exc:
                raise FetchError(f"{name}: download of {url} failed ({exc})") from exc
            if want and sha256_hex(raw) != want:
                raise FetchError(f"{name}: checksum mismatch for {url}")
            texts.append(raw.decode("utf-8", errors="replace"))
        dataset = CONVERTERS[entry.get("format", name)](texts)
        _store(dataset_to_csv(dataset).encode("utf-8"), csv_path, digest_path)
        log.info("downloaded %s -> %s", name, csv_path)
        return csv_path

