"""Wall-clock timing of debanding methods.

Images are decoded before the timed region and outputs are discarded, so the
measurement covers the transform only. One warm-up run per method is excluded.
Reference timings from other environments can be ingested as context rows and
are reported verbatim, never asserted against.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .imagebuf import ImageBuffer
from .report import render_table

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimingRecord:
    method: str
    image_id: str
    seconds: float
    repeat_index: int


@dataclass
class BenchSummary:
    method: str
    mean_seconds: float
    n: int
    workers: int = 1
    failures: list[str] = field(default_factory=list)


def time_method(
    apply_fn: Callable[[ImageBuffer], ImageBuffer],
    method: str,
    images: Sequence[tuple[str, ImageBuffer]],
    repeats: int = 3,
    warmup: bool = True,
    workers: int = 1,
) -> tuple[list[TimingRecord], BenchSummary]:
    """Run apply_fn over decoded images `repeats` times each and time every run."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if not images:
        raise ValueError("no images to benchmark")
    records: list[TimingRecord] = []
    failures: list[str] = []
    warmed = not warmup
    for image_id, img in images:
        try:
            if not warmed:
                apply_fn(img)  # excluded from the records
                warmed = True
            for rep in range(repeats):
                t0 = time.perf_counter()
                apply_fn(img)
                dt = time.perf_counter() - t0
                records.append(TimingRecord(method, image_id, dt, rep))
        except Exception as e:
            failures.append(image_id)
            log.warning("%s failed on %s: %s (excluded from summary)", method, image_id, e)
    if not records:
        raise RuntimeError(f"{method}: every image failed, nothing to summarize")
    mean = sum(r.seconds for r in records) / len(records)
    return records, BenchSummary(method, mean, len(records), workers=workers, failures=failures)


def load_reference_timings(path) -> list[tuple[str, float]]:
    """CSV rows of (method, seconds) measured elsewhere; shown as context."""
    rows = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: expected (method, seconds) rows, got {row}")
            rows.append((row[0].strip(), float(row[1])))
    return rows


def render_bench_table(
    summaries: Sequence[BenchSummary], reference: Sequence[tuple[str, float]] = ()
) -> str:
    rows = [[s.method, f"{s.mean_seconds:.4f}"] for s in summaries]
    rows += [[name, f"{seconds:.4f}"] for name, seconds in reference]
    return render_table(["Model", "Time (seconds)"], rows)


def bench_report_jsonable(
    summaries: Sequence[BenchSummary],
    records: Sequence[TimingRecord],
    reference: Sequence[tuple[str, float]] = (),
) -> dict:
    return {
        "summaries": [
            {
                "method": s.method,
                "mean_seconds": s.mean_seconds,
                "n": s.n,
                "workers": s.workers,
                "failures": s.failures,
            }
            for s in summaries
        ],
        "records": [
            {
                "method": r.method,
                "image_id": r.image_id,
                "seconds": r.seconds,
                "repeat_index": r.repeat_index,
            }
            for r in records
        ],
        "reference": [{"method": m, "seconds": s} for m, s in reference],
    }
