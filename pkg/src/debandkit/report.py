"""Aligned-column text tables and JSON emission for evaluation and timing reports."""

from __future__ import annotations

import json
import math
from typing import Sequence

from .metrics import DebandReport


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def fmt(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt(headers), sep] + [fmt(r) for r in rows])


def _mean_sd_cell(mean: float, sd: float) -> str:
    return f"{mean:.4f} (+/-{sd:.4f})"


def render_metric_table(label: str, report: DebandReport) -> str:
    """Rows of models, columns of metrics, cells of mean (+/-SD)."""
    metric_names = sorted(report.aggregate)
    for c in report.context:
        if c.metric not in metric_names:
            metric_names.append(c.metric)
    rows = [
        [label] + [
            _mean_sd_cell(report.aggregate[m].mean, report.aggregate[m].sd)
            if m in report.aggregate
            else "-"
            for m in metric_names
        ]
    ]
    by_label: dict[str, dict[str, str]] = {}
    for c in report.context:
        by_label.setdefault(c.label, {})[c.metric] = _mean_sd_cell(c.mean, c.sd)
    for ctx_label, cells in by_label.items():
        rows.append([ctx_label] + [cells.get(m, "-") for m in metric_names])
    return render_table(["Model"] + metric_names, rows)


def write_json(path, payload: dict) -> None:
    def default(o):
        if isinstance(o, float) and math.isinf(o):
            return "identical"
        raise TypeError(f"not JSON serializable: {o!r}")

    with open(path, "w") as f:
        json.dump(payload, f, indent=2, default=default, sort_keys=False)
        f.write("\n")
