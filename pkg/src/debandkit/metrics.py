"""No-reference banding proxy, PSNR, and mean +/- SD aggregation.

The banding proxy counts "band edge" pixels: a small luma step (1..step_max)
whose neighbouring differences are exactly flat for flat_window samples on
both sides. It stands in for external banding indices, which can instead be
ingested as score files and aggregated through the same report path.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .imagebuf import ImageBuffer

# BT.709 luma, 8-bit fixed point: 54 + 183 + 19 = 256
LUMA_WEIGHTS = (54, 183, 19)

PSNR_IDENTICAL = math.inf


def luma709(img: ImageBuffer) -> np.ndarray:
    """Integer BT.709 luma plane (uint8)."""
    a = img.array.astype(np.int32)
    y = (LUMA_WEIGHTS[0] * a[:, :, 0] + LUMA_WEIGHTS[1] * a[:, :, 1] + LUMA_WEIGHTS[2] * a[:, :, 2] + 128) >> 8
    return y.astype(np.uint8)


def _edge_mask_1d(d: np.ndarray, flat_window: int, step_max: int) -> np.ndarray:
    """Band-edge mask along axis 1 of a difference plane d[y, x] = Y[y,x+1]-Y[y,x]."""
    n = d.shape[1]
    mask = np.zeros(d.shape, dtype=bool)
    if n < 2 * flat_window + 1:
        return mask
    step = (np.abs(d) >= 1) & (np.abs(d) <= step_max)
    zero = (d == 0).astype(np.int32)
    csum = np.concatenate([np.zeros((d.shape[0], 1), dtype=np.int32), np.cumsum(zero, axis=1)], axis=1)
    xs = np.arange(flat_window, n - flat_window)
    left_flat = (csum[:, xs] - csum[:, xs - flat_window]) == flat_window
    right_flat = (csum[:, xs + 1 + flat_window] - csum[:, xs + 1]) == flat_window
    mask[:, xs] = step[:, xs] & left_flat & right_flat
    return mask


def band_edge_density(img: ImageBuffer, flat_window: int = 3, step_max: int = 8) -> float:
    """Fraction of pixels that sit on a flat-flanked small luma step, in [0, 1]."""
    min_dim = 2 * flat_window + 1
    if img.width < min_dim or img.height < min_dim:
        raise ContractError(
            f"image {img.width}x{img.height} too small for flat_window={flat_window} "
            f"(needs at least {min_dim}x{min_dim})"
        )
    y = luma709(img).astype(np.int16)
    dh = y[:, 1:] - y[:, :-1]
    dv = (y[1:, :] - y[:-1, :]).T
    edge = np.zeros((img.height, img.width), dtype=bool)
    edge[:, : dh.shape[1]] |= _edge_mask_1d(dh, flat_window, step_max)
    edge[: dv.shape[1], :] |= _edge_mask_1d(dv, flat_window, step_max).T
    return float(np.count_nonzero(edge)) / float(img.width * img.height)


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """Peak-255 PSNR in dB over all channels; math.inf for identical images."""
    if a.width != b.width or a.height != b.height:
        raise ContractError(
            f"psnr needs equal dimensions, got {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    diff = a.array.astype(np.float64) - b.array.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_IDENTICAL
    return 10.0 * math.log10(255.0**2 / mse)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    sd: float  # population standard deviation
    n: int


@dataclass(frozen=True)
class ContextRow:
    """Externally supplied aggregate row, re-emitted verbatim in reports."""

    label: str
    metric: str
    mean: float
    sd: float
    n: int | None = None


@dataclass
class DebandReport:
    per_image: dict[str, dict[str, float]]
    aggregate: dict[str, MetricSummary]
    context: list[ContextRow] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        def enc(v: float):
            return "identical" if math.isinf(v) else v

        return {
            "per_image": {
                img: {m: enc(s) for m, s in scores.items()}
                for img, scores in self.per_image.items()
            },
            "aggregate": {
                m: {"mean": s.mean, "sd": s.sd, "n": s.n} for m, s in self.aggregate.items()
            },
            "sd_kind": "population",
            "context": [
                {"label": c.label, "metric": c.metric, "mean": c.mean, "sd": c.sd, "n": c.n}
                for c in self.context
            ],
        }


def aggregate(per_image: dict[str, dict[str, float]]) -> DebandReport:
    """Mean and population SD per metric over finite per-image scores."""
    if not per_image:
        raise ContractError("aggregate needs at least one scored image")
    metrics: dict[str, list[float]] = {}
    for scores in per_image.values():
        for name, value in scores.items():
            metrics.setdefault(name, []).append(value)
    summary = {}
    for name, values in metrics.items():
        finite = np.asarray([v for v in values if math.isfinite(v)], dtype=np.float64)
        if finite.size == 0:
            raise ContractError(f"metric {name!r} has no finite scores to aggregate")
        summary[name] = MetricSummary(
            mean=float(finite.mean()), sd=float(finite.std()), n=int(finite.size)
        )
    return DebandReport(per_image=dict(per_image), aggregate=summary)


def load_scores_csv(path) -> dict[str, dict[str, float]]:
    """Per-image external scores: CSV rows of (image_id, metric, score)."""
    per_image: dict[str, dict[str, float]] = {}
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 3:
                raise ContractError(f"{path}: expected 3 columns (image_id, metric, score), got {row}")
            image_id, metric, score = (c.strip() for c in row)
            per_image.setdefault(image_id, {})[metric] = float(score)
    return per_image


def load_context_csv(path) -> list[ContextRow]:
    """Aggregate context rows: CSV of (label, metric, mean, sd[, n])."""
    rows = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) not in (4, 5):
                raise ContractError(
                    f"{path}: expected (label, metric, mean, sd[, n]) columns, got {row}"
                )
            label, metric, mean, sd = (c.strip() for c in row[:4])
            n = int(row[4]) if len(row) == 5 and row[4].strip() else None
            rows.append(ContextRow(label=label, metric=metric, mean=float(mean), sd=float(sd), n=n))
    return rows
