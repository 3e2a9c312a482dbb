"""Overlapping tile grids and reciprocal-distance weighted fusion.

A grid of square tiles covers a raster; each output pixel is merged from the
tiles containing it with weight 1/distance to the tile center. With
stride = tile/2 every pixel is covered by 1, 2, or 4 tiles.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ContractError
from .imagebuf import ImageBuffer

DISTANCE_EPS = 1e-6  # zero-distance guard; only reachable for odd tile sides


@dataclass(frozen=True)
class TileRef:
    """One tile: top-left corner and the center of its pixel lattice."""

    x0: int
    y0: int
    center_x: float
    center_y: float


@dataclass(frozen=True)
class TileGrid:
    image_w: int
    image_h: int
    tile: int
    stride: int
    tiles: tuple[TileRef, ...]
    cols: int
    rows: int
    exact: bool  # grid covers the image with no remainder on either axis

    def __len__(self) -> int:
        return len(self.tiles)


def plan_grid(
    image_w: int, image_h: int, tile: int, stride: int, allow_partial: bool = False
) -> TileGrid:
    """Row-major grid of tile x tile windows stepped by `stride`.

    By default the grid must cover the image exactly ((dim - tile) % stride == 0);
    otherwise an AlignmentError tells the caller to pad first. Dataset-style
    sweeps that tolerate an uncovered remainder pass allow_partial=True.
    """
    if tile < 1:
        raise ContractError(f"tile must be >= 1, got {tile}")
    if not 1 <= stride <= tile:
        raise ContractError(f"stride must be in [1, tile], got stride={stride} tile={tile}")
    if image_w < tile or image_h < tile:
        raise ContractError(
            f"image {image_w}x{image_h} is smaller than the {tile}x{tile} tile; pad first"
        )
    exact = (image_w - tile) % stride == 0 and (image_h - tile) % stride == 0
    if not exact and not allow_partial:
        raise AlignmentError(
            f"{tile}px tiles at stride {stride} cannot exactly cover {image_w}x{image_h}; pad first"
        )
    cols = (image_w - tile) // stride + 1
    rows = (image_h - tile) // stride + 1
    half = (tile - 1) / 2.0
    tiles = tuple(
        TileRef(x0=c * stride, y0=r * stride, center_x=c * stride + half, center_y=r * stride + half)
        for r in range(rows)
        for c in range(cols)
    )
    return TileGrid(image_w, image_h, tile, stride, tiles, cols, rows, exact)


def coverage_count(grid: TileGrid, x: int, y: int) -> int:
    """Number of tiles containing pixel (x, y)."""
    if not (0 <= x < grid.image_w and 0 <= y < grid.image_h):
        raise ContractError(f"pixel ({x},{y}) outside image {grid.image_w}x{grid.image_h}")

    def axis_count(v: int, n: int) -> int:
        # tiles with index k cover [k*stride, k*stride + tile)
        k_min = max(0, -(-(v - grid.tile + 1) // grid.stride))  # ceil division
        k_max = min(n - 1, v // grid.stride)
        return max(0, k_max - k_min + 1)

    return axis_count(x, grid.cols) * axis_count(y, grid.rows)


def coverage_plane(grid: TileGrid) -> np.ndarray:
    """Per-pixel tile-coverage counts as an int32 plane."""
    counts = np.zeros((grid.image_h, grid.image_w), dtype=np.int32)
    for t in grid.tiles:
        counts[t.y0 : t.y0 + grid.tile, t.x0 : t.x0 + grid.tile] += 1
    return counts


def _accumulate_band(grid, tile_arrays, num, den, y_lo, y_hi):
    """Add every tile's weighted contribution to the rows [y_lo, y_hi).

    Tiles are visited in grid order, so each pixel accumulates its terms in a
    fixed order regardless of how rows are banded across workers.
    """
    tile = grid.tile
    xs = np.arange(grid.image_w, dtype=np.float64)
    ys = np.arange(y_lo, y_hi, dtype=np.float64)
    for t, data in zip(grid.tiles, tile_arrays):
        ty_lo = max(t.y0, y_lo)
        ty_hi = min(t.y0 + tile, y_hi)
        if ty_lo >= ty_hi:
            continue
        dx = xs[t.x0 : t.x0 + tile] - t.center_x
        dy = ys[ty_lo - y_lo : ty_hi - y_lo] - t.center_y
        dist = np.hypot(dy[:, None], dx[None, :])
        w = 1.0 / np.maximum(dist, DISTANCE_EPS)
        block = data[ty_lo - t.y0 : ty_hi - t.y0, :, :].astype(np.float64)
        num[ty_lo:ty_hi, t.x0 : t.x0 + tile, :] += w[:, :, None] * block
        den[ty_lo:ty_hi, t.x0 : t.x0 + tile] += w


def fuse_planes(
    grid: TileGrid, tile_outputs: list[ImageBuffer], workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Accumulated (sum w_i * p_i, sum w_i) planes in double precision.

    Exposed separately from fuse_weighted so the pre-quantization merge can be
    checked against hand-computed values.
    """
    if len(tile_outputs) != len(grid.tiles):
        raise ContractError(
            f"expected {len(grid.tiles)} tile outputs, got {len(tile_outputs)}"
        )
    if not grid.exact:
        raise AlignmentError("grid does not cover the image exactly; fusion would leave gaps")
    for i, t in enumerate(tile_outputs):
        if t.width != grid.tile or t.height != grid.tile:
            raise ContractError(
                f"tile output {i} is {t.width}x{t.height}, expected {grid.tile}x{grid.tile}"
            )
    tile_arrays = [t.array for t in tile_outputs]
    num = np.zeros((grid.image_h, grid.image_w, 3), dtype=np.float64)
    den = np.zeros((grid.image_h, grid.image_w), dtype=np.float64)
    workers = max(1, workers)
    if workers == 1:
        _accumulate_band(grid, tile_arrays, num, den, 0, grid.image_h)
    else:
        bounds = np.linspace(0, grid.image_h, workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_accumulate_band, grid, tile_arrays, num, den, lo, hi)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if lo < hi
            ]
            for f in futures:
                f.result()
    return num, den


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Round half away from zero and clamp to [0, 255]."""
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def fuse_weighted(
    grid: TileGrid, tile_outputs: list[ImageBuffer], workers: int = 1
) -> ImageBuffer:
    """Merge per-tile outputs into one image.

    Each pixel is the weighted mean of the tiles containing it, with weight
    the reciprocal of the Euclidean distance from the pixel to the tile
    center (clamped at DISTANCE_EPS). The per-pixel gather order is the grid
    order, so the result is identical for any worker count.
    """
    num, den = fuse_planes(grid, tile_outputs, workers=workers)
    return ImageBuffer(quantize_u8(num / den[:, :, None]))
