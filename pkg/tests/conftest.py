import csv
from pathlib import Path

import pytest

from fspesoa.data import format_value, load_csv
from fspesoa.fetch import DATASET_NAMES, bundled_path

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def datasets():
    """All seven bundled datasets, loaded once."""
    return {name: load_csv(bundled_path(name), name=name) for name in DATASET_NAMES}


def published_rows(name: str) -> list[dict]:
    with open(DATA_DIR / f"published_{name}.csv", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


# Inverse of each converter: rebuild the upstream file layout from a
# canonical dataset so downloads can be simulated without a network.

_GLASS_CODES = {
    "building_windows_float_processed": "1",
    "building_windows_non_float_processed": "2",
    "vehicle_windows_float_processed": "3",
    "vehicle_windows_non_float_processed": "4",
    "containers": "5",
    "tableware": "6",
    "headlamps": "7",
}


def raw_source(ds) -> list[bytes]:
    name = ds.name
    lines = []
    for i, (row, lab) in enumerate(zip(ds.features, ds.labels)):
        vals = [format_value(v) for v in row]
        label = ds.class_names[lab]
        if name == "iris":
            lines.append(",".join(vals + [f"Iris-{label}"]))
        elif name == "glass":
            lines.append(",".join(vals + [_GLASS_CODES[label]]))
        elif name == "ion":
            lines.append(",".join(vals[:1] + ["0"] + vals[1:] + [label[0]]))
        elif name == "pima":
            lines.append(",".join(vals + [{"tested_negative": "0", "tested_positive": "1"}[label]]))
        elif name == "vehicle":
            lines.append(" ".join(vals + [label]) + " ")
        elif name == "wine":
            lines.append(",".join([str(int(label.split("_")[1]) + 1)] + vals))
        elif name == "wisconsin":
            lines.append(",".join([str(842302 + i), {"malignant": "M", "benign": "B"}[label]] + vals))
    if name == "vehicle":
        # upstream ships nine chunk files
        step = -(-len(lines) // 9)
        return [("\n".join(lines[k:k + step]) + "\n").encode() for k in range(0, len(lines), step)]
    return [("\n".join(lines) + "\n").encode()]


# --- acceptance summary -----------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def criterion(label: str, ok: bool, detail: str) -> bool:
    """Record one acceptance line; the caller still asserts ``ok``."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
