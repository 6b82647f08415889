"""Structure comparison metrics and their aggregation over a test set.

Count errors are signed (true minus predicted); origin and size errors are
absolute pixel differences. When cardinalities disagree, row heights and
column widths are compared index-aligned over the shared prefix, which keeps
the size metrics defined while the count metrics expose the mismatch.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .fileio import atomic_write_text, write_json
from .model import TableGenotype, canonicalize

COUNT_METRICS = ("row_count_error", "col_count_error")
GEOMETRY_METRICS = (
    "x0_abs_error",
    "y0_abs_error",
    "col_width_abs_error",
    "row_height_abs_error",
)

METRIC_LABELS = {
    "pct_correct_row_count": "% correct row count",
    "pct_correct_col_count": "% correct column count",
    "row_count_error": "Error in row number",
    "col_count_error": "Error in column number",
    "x0_abs_error": "Error in x0, px",
    "y0_abs_error": "Error in y0, px",
    "col_width_abs_error": "Error in col. width, px",
    "row_height_abs_error": "Error in row height, px",
}

COUNT_BIN_WIDTH = 1
GEOMETRY_BIN_WIDTH = 2


@dataclass(frozen=True)
class StructureErrors:
    row_count_error: int
    col_count_error: int
    x0_abs_error: int
    y0_abs_error: int
    row_height_abs_errors: tuple
    col_width_abs_errors: tuple


@dataclass(frozen=True)
class EvalReport:
    n_samples: int
    pct_correct_row_count: float
    pct_correct_col_count: float
    means: dict
    stds: dict
    histograms: dict

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("report needs at least one sample")


def compare(truth: TableGenotype, pred: TableGenotype) -> StructureErrors:
    t = canonicalize(truth)
    p = canonicalize(pred)
    shared_rows = min(t.effective_rows, p.effective_rows)
    shared_cols = min(t.effective_cols, p.effective_cols)
    return StructureErrors(
        row_count_error=t.effective_rows - p.effective_rows,
        col_count_error=t.effective_cols - p.effective_cols,
        x0_abs_error=abs(t.origin_x - p.origin_x),
        y0_abs_error=abs(t.origin_y - p.origin_y),
        row_height_abs_errors=tuple(
            abs(t.row_heights[i] - p.row_heights[i]) for i in range(shared_rows)
        ),
        col_width_abs_errors=tuple(
            abs(t.col_widths[i] - p.col_widths[i]) for i in range(shared_cols)
        ),
    )


def _histogram(values: np.ndarray, bin_width: int) -> dict:
    if values.size == 0:
        return {"bin_lo": [], "bin_hi": [], "count": []}
    lo = int(np.floor(values.min() / bin_width)) * bin_width
    hi = int(np.floor(values.max() / bin_width)) * bin_width + bin_width
    edges = np.arange(lo, hi + bin_width, bin_width)
    counts, _ = np.histogram(values, bins=edges)
    return {
        "bin_lo": edges[:-1].tolist(),
        "bin_hi": edges[1:].tolist(),
        "count": counts.tolist(),
    }


def aggregate(errors) -> EvalReport:
    """Mean, population standard deviation, and histogram per metric."""
    errors = list(errors)
    if not errors:
        raise ValueError("cannot aggregate an empty error list")
    series = {
        "row_count_error": np.array([e.row_count_error for e in errors], dtype=np.float64),
        "col_count_error": np.array([e.col_count_error for e in errors], dtype=np.float64),
        "x0_abs_error": np.array([e.x0_abs_error for e in errors], dtype=np.float64),
        "y0_abs_error": np.array([e.y0_abs_error for e in errors], dtype=np.float64),
        "row_height_abs_error": np.concatenate(
            [np.asarray(e.row_height_abs_errors, dtype=np.float64) for e in errors]
        ),
        "col_width_abs_error": np.concatenate(
            [np.asarray(e.col_width_abs_errors, dtype=np.float64) for e in errors]
        ),
    }
    means, stds, histograms = {}, {}, {}
    for name, values in series.items():
        if values.size == 0:
            means[name] = 0.0
            stds[name] = 0.0
        else:
            means[name] = float(values.mean())
            stds[name] = float(values.std())
        width = COUNT_BIN_WIDTH if name in COUNT_METRICS else GEOMETRY_BIN_WIDTH
        histograms[name] = _histogram(values, width)
    return EvalReport(
        n_samples=len(errors),
        pct_correct_row_count=float(100.0 * np.mean(series["row_count_error"] == 0)),
        pct_correct_col_count=float(100.0 * np.mean(series["col_count_error"] == 0)),
        means=means,
        stds=stds,
        histograms=histograms,
    )


# --- reporting ---------------------------------------------------------------

def report_to_json(report: EvalReport) -> dict:
    return {
        "n_samples": report.n_samples,
        "pct_correct_row_count": report.pct_correct_row_count,
        "pct_correct_col_count": report.pct_correct_col_count,
        "means": dict(report.means),
        "stds": dict(report.stds),
        "histograms": dict(report.histograms),
    }


def save_reports_json(path, reports: dict) -> None:
    write_json(path, {label: report_to_json(r) for label, r in reports.items()})


def _metric_rows():
    yield "pct_correct_row_count"
    yield "pct_correct_col_count"
    for name in COUNT_METRICS:
        yield name
    for name in GEOMETRY_METRICS:
        yield name


def _cell(report: EvalReport, metric: str) -> str:
    if metric.startswith("pct_"):
        return f"{getattr(report, metric):.1f}"
    return f"{report.means[metric]:.1f} ({report.stds[metric]:.1f})"


def format_summary(reports: dict) -> str:
    """Plain-text metric table, one column per report label."""
    labels = list(reports)
    header = ["Metric"] + labels
    rows = [[METRIC_LABELS[m]] + [_cell(reports[l], m) for l in labels] for m in _metric_rows()]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def save_report_csv(path, reports: dict) -> None:
    """One row per report label, one column per metric."""
    buf = io.StringIO()
    metrics = list(_metric_rows())
    header = ["label", "n_samples"] + ['"' + METRIC_LABELS[m] + '"' for m in metrics]
    buf.write(",".join(header) + "\n")
    for label, report in reports.items():
        cells = [label, str(report.n_samples)]
        cells += ['"' + _cell(report, m) + '"' for m in metrics]
        buf.write(",".join(cells) + "\n")
    atomic_write_text(path, buf.getvalue())


def save_histograms_csv(path, reports: dict) -> None:
    buf = io.StringIO()
    buf.write("label,metric,bin_lo,bin_hi,count\n")
    for label, report in reports.items():
        for metric, hist in report.histograms.items():
            for lo, hi, count in zip(hist["bin_lo"], hist["bin_hi"], hist["count"]):
                buf.write(f"{label},{metric},{lo},{hi},{count}\n")
    atomic_write_text(path, buf.getvalue())
