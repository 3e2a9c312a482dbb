"""Classical threshold-gated averaging deband filter.

For each pixel a radius r is drawn from [1, range] by a counter-based hash of
(x, y, seed); the four references at (x, y-r), (x, y+r), (x-r, y), (x+r, y)
(mirrored at borders) replace the pixel with their rounded average when all
four sit strictly within `threshold` of the source sample. This is a
reproducible stand-in for the classic filter family, not a bit-exact clone of
any particular implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .imagebuf import ImageBuffer


@dataclass(frozen=True)
class ClassicDebandParams:
    threshold: int = 5  # 8-bit sample units, ~0.02 * 255
    range: int = 16  # max reference distance in pixels
    seed: int = 0

    def __post_init__(self):
        if self.threshold < 0:
            raise ContractError(f"threshold must be >= 0, got {self.threshold}")
        if self.range < 1:
            raise ContractError(f"range must be >= 1, got {self.range}")


def _splitmix64(v: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # wraparound modulo 2^64 is the point
        z = v + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _radius_field(width: int, height: int, params: ClassicDebandParams) -> np.ndarray:
    """Per-pixel radius in [1, range], shared across channels."""
    xs = np.arange(width, dtype=np.uint64)[None, :]
    ys = np.arange(height, dtype=np.uint64)[:, None]
    counter = (ys << np.uint64(32)) | xs
    seed_mix = _splitmix64(np.uint64(params.seed & 0xFFFFFFFFFFFFFFFF))
    h = _splitmix64(counter ^ seed_mix)
    return (np.uint64(1) + h % np.uint64(params.range)).astype(np.int64)


def _mirror_index(idx: np.ndarray, n: int) -> np.ndarray:
    """Symmetric mirror with edge repeat, iterated for any out-of-range index."""
    period = 2 * n
    j = np.mod(idx, period)
    return np.where(j >= n, period - 1 - j, j)


def classic_deband(img: ImageBuffer, params: ClassicDebandParams = ClassicDebandParams()) -> ImageBuffer:
    h, w = img.height, img.width
    src = img.array.astype(np.int16)
    r = _radius_field(w, h, params)
    xs = np.broadcast_to(np.arange(w, dtype=np.int64)[None, :], (h, w))
    ys = np.broadcast_to(np.arange(h, dtype=np.int64)[:, None], (h, w))

    up = src[_mirror_index(ys - r, h), xs]
    down = src[_mirror_index(ys + r, h), xs]
    left = src[ys, _mirror_index(xs - r, w)]
    right = src[ys, _mirror_index(xs + r, w)]

    thr = np.int16(params.threshold)
    gate = (
        (np.abs(up - src) < thr)
        & (np.abs(down - src) < thr)
        & (np.abs(left - src) < thr)
        & (np.abs(right - src) < thr)
    )
    total = up.astype(np.int32) + down + left + right
    avg = (total + 2) >> 2  # round(total/4) half away from zero; total >= 0
    out = np.where(gate, avg.astype(np.int16), src)
    return ImageBuffer(out.astype(np.uint8))
