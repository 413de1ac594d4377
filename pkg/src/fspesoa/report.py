"""Render aggregated benchmark results as Markdown, CSV and SVG bar charts."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from xml.sax.saxutils import escape

from .bench import ReportBundle
from .metrics import METRICS, WinLossTable

SELECTOR_LABELS = {"fspesoa": "FS-PeSOA", "pca": "PCA", "lda": "LDA", "none": "All features"}
CLASSIFIER_LABELS = {"knn": "KNN", "rf": "Random Forest", "svm": "SVM"}
METRIC_LABELS = {"accuracy": "Accuracy", "precision": "Precision", "recall": "Recall", "f1": "F1 Score"}


def _writable_dir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _fmt_metric(metric: str, value: float) -> str:
    # accuracy as a percentage, the rest as fractions
    return f"{100 * value:.2f}" if metric == "accuracy" else f"{value:.2f}"


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:g}"


def _md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def results_markdown(bundle: ReportBundle) -> str:
    """One row per combination: feature counts and median metrics."""
    header = ["Dataset", "Selector", "Classifier", "Before", "After", "Seeds"] + [METRIC_LABELS[m] for m in METRICS]
    rows = []
    for a in bundle.aggregates:
        rows.append([
            a.dataset,
            SELECTOR_LABELS.get(a.selector, a.selector),
            CLASSIFIER_LABELS.get(a.classifier, a.classifier),
            a.n_features,
            _fmt_count(a.n_selected),
            a.n_seeds,
        ] + [_fmt_metric(m, a.median[m]) for m in METRICS])
    return "# Median results over seeds\n\n" + _md_table(header, rows)


def range_markdown(bundle: ReportBundle) -> str:
    header = ["Dataset", "Selector", "Classifier"] + [f"{METRIC_LABELS[m]} (min-max)" for m in METRICS]
    rows = [
        [a.dataset, SELECTOR_LABELS.get(a.selector, a.selector), CLASSIFIER_LABELS.get(a.classifier, a.classifier)]
        + [f"{_fmt_metric(m, a.minimum[m])}-{_fmt_metric(m, a.maximum[m])}" for m in METRICS]
        for a in bundle.aggregates
    ]
    return "# Spread over seeds\n\n" + _md_table(header, rows)


def winloss_markdown(table: WinLossTable, reference: WinLossTable | None = None) -> str:
    """Win/loss grid. With a ``reference`` table (for instance published
    marks) the totals are compared and every differing cell is listed."""
    header = ["Dataset", "Classifier"] + [METRIC_LABELS[m] for m in METRICS]
    rows = []
    last = None
    for (dataset, classifier), marks in table.cells.items():
        rows.append([dataset if dataset != last else "", CLASSIFIER_LABELS.get(classifier, classifier)]
                    + [marks[m] for m in METRICS])
        last = dataset
    rows.append(["Win/Loss", ""] + [table.summary(m) for m in METRICS])
    out = "# Win/loss of FS-PeSOA against PCA and LDA\n\n" + _md_table(header, rows)
    if reference is None:
        return out
    totals = []
    for m in METRICS:
        ours, ref = table.totals[m], reference.totals.get(m)
        totals.append([METRIC_LABELS[m], table.summary(m),
                       reference.summary(m) if ref is not None else "", "" if ours == ref else "differs"])
    out += "\n## Totals against the reference\n\n" + _md_table(["Metric", "Computed", "Reference", ""], totals)
    diffs = []
    for key, marks in table.cells.items():
        ref_marks = reference.cells.get(key)
        for m in METRICS:
            if ref_marks is not None and marks[m] != ref_marks.get(m):
                diffs.append([key[0], CLASSIFIER_LABELS.get(key[1], key[1]), METRIC_LABELS[m],
                              marks[m] or "-", ref_marks.get(m) or "-"])
    if diffs:
        out += "\n## Cells that differ from the reference\n\n" + _md_table(
            ["Dataset", "Classifier", "Metric", "Computed", "Reference"], diffs)
    return out


def parse_winloss_markdown(text: str) -> dict:
    """Read back the grid written by :func:`winloss_markdown`."""
    cells = {}
    dataset = None
    lines = [l for l in text.splitlines() if l.startswith("| ")]
    inv = {v: k for k, v in CLASSIFIER_LABELS.items()}
    for line in lines[1:]:
        parts = [p.strip() for p in line.strip("|").split("|")]
        if parts[0] == "Win/Loss" or len(parts) != 2 + len(METRICS):
            break
        dataset = parts[0] or dataset
        cells[(dataset, inv.get(parts[1], parts[1]))] = dict(zip(METRICS, parts[2:]))
    return cells


def emit_markdown(bundle: ReportBundle, out_dir) -> list[Path]:
    out = _writable_dir(out_dir)
    tables = _writable_dir(out / "tables")
    paths = [tables / "results.md", tables / "ranges.md"]
    paths[0].write_text(results_markdown(bundle), encoding="utf-8")
    paths[1].write_text(range_markdown(bundle), encoding="utf-8")
    if bundle.winloss is not None:
        p = out / "winloss.md"
        p.write_text(winloss_markdown(bundle.winloss), encoding="utf-8")
        paths.append(p)
    return paths


def results_csv(bundle: ReportBundle) -> str:
    """One row per (combination, metric)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "selector", "classifier", "metric", "median", "min", "max",
                "n_seeds", "n_features", "n_selected"])
    for a in bundle.aggregates:
        for m in METRICS:
            w.writerow([a.dataset, a.selector, a.classifier, m, f"{a.median[m]:.6f}",
                        f"{a.minimum[m]:.6f}", f"{a.maximum[m]:.6f}", a.n_seeds, a.n_features,
                        _fmt_count(a.n_selected)])
    return buf.getvalue()


def emit_csv(bundle: ReportBundle, out_dir) -> Path:
    tables = _writable_dir(Path(out_dir) / "tables")
    path = tables / "results.csv"
    path.write_text(results_csv(bundle), encoding="utf-8")
    return path


_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"]


def svg_bars(bundle: ReportBundle, dataset: str) -> str:
    """Grouped bars: one group per metric, one bar per (selector, classifier)."""
    aggs = [a for a in bundle.aggregates if a.dataset == dataset]
    if not aggs:
        raise KeyError(dataset)
    n_bars = len(aggs)
    bar_w, gap, left, top, plot_h = 14, 24, 50, 40, 220
    group_w = n_bars * bar_w
    width = left + len(METRICS) * (group_w + gap) + 200
    height = top + plot_h + 50
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{left}" y="20" font-family="sans-serif" font-size="14">'
        f'{escape(dataset)}: median over seeds</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + len(METRICS) * (group_w + gap)}" '
        f'y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h * (1 - tick)
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" font-family="sans-serif" font-size="10" '
                     f'text-anchor="end">{tick:.2f}</text>')
    for g, metric in enumerate(METRICS):
        x0 = left + gap / 2 + g * (group_w + gap)
        for b, a in enumerate(aggs):
            v = max(0.0, min(1.0, a.median[metric]))
            h = plot_h * v
            parts.append(
                f'<rect x="{x0 + b * bar_w:.1f}" y="{top + plot_h - h:.2f}" width="{bar_w - 2}" '
                f'height="{h:.2f}" fill="{_PALETTE[b % len(_PALETTE)]}">'
                f'<title>{escape(a.selector)}/{escape(a.classifier)} {metric}={a.median[metric]:.4f}</title></rect>'
            )
        parts.append(f'<text x="{x0 + group_w / 2:.1f}" y="{top + plot_h + 16}" font-family="sans-serif" '
                     f'font-size="11" text-anchor="middle">{METRIC_LABELS[metric]}</text>')
    lx = left + len(METRICS) * (group_w + gap) + 10
    for b, a in enumerate(aggs):
        y = top + b * 16
        label = f"{CLASSIFIER_LABELS.get(a.classifier, a.classifier)} with {SELECTOR_LABELS.get(a.selector, a.selector)}"
        parts.append(f'<rect x="{lx}" y="{y}" width="10" height="10" fill="{_PALETTE[b % len(_PALETTE)]}"/>')
        parts.append(f'<text x="{lx + 14}" y="{y + 9}" font-family="sans-serif" font-size="10">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg_bars(bundle: ReportBundle, out_dir) -> list[Path]:
    figures = _writable_dir(Path(out_dir) / "figures")
    paths = []
    for dataset in dict.fromkeys(a.dataset for a in bundle.aggregates):
        p = figures / f"{dataset}.svg"
        p.write_text(svg_bars(bundle, dataset), encoding="utf-8")
        paths.append(p)
    return paths


def emit_all(bundle: ReportBundle, out_dir) -> list[Path]:
    return [*emit_markdown(bundle, out_dir), emit_csv(bundle, out_dir), *emit_svg_bars(bundle, out_dir)]
