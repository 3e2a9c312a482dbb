"""Image-level application modes over any debanding backend.

Full mode mirror-pads to the backend's alignment, runs the backend once, and
crops back. Weighted mode pads, runs the backend over overlapping 256px tiles
at stride 128, and fuses the tile outputs with reciprocal-distance weights.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Protocol

import numpy as np

from . import generator as gen
from .baseline import ClassicDebandParams, classic_deband
from .errors import ContractError, DebandError
from .imagebuf import ImageBuffer, crop, extract_window, pad_to_multiple
from .tiling import fuse_weighted, plan_grid

TILE = 256
STRIDE = 128
ALIGN = 256


class DebandBackend(Protocol):
    """Single-image transform preserving dimensions; safe for concurrent calls."""

    name: str
    divisor: int  # input dims must be divisible by this

    def apply(self, img: ImageBuffer) -> ImageBuffer: ...


class IdentityBackend:
    """Pass-through backend, for round-trip checks and timing floors."""

    name = "identity"
    divisor = 1

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        return img


class ClassicBackend:
    name = "classic"
    divisor = 1

    def __init__(self, params: ClassicDebandParams = ClassicDebandParams()):
        self.params = params

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        return classic_deband(img, self.params)


class GeneratorBackend:
    name = "unet"
    divisor = gen.ALIGN

    def __init__(self, model: gen.GeneratorModel, dtype=np.float32):
        self.model = model
        self.dtype = dtype

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        return gen.forward(self.model, img, dtype=self.dtype)


def _checked_apply(backend: DebandBackend, img: ImageBuffer, what: str) -> ImageBuffer:
    try:
        out = backend.apply(img)
    except Exception as e:
        raise DebandError(f"backend {backend.name!r} failed on {what}: {e}") from e
    if out.width != img.width or out.height != img.height:
        raise ContractError(
            f"backend {backend.name!r} returned {out.width}x{out.height} "
            f"for a {img.width}x{img.height} input on {what}"
        )
    return out


def deband_full(backend: DebandBackend, img: ImageBuffer, align: int = ALIGN) -> ImageBuffer:
    """Pad to `align`, apply the backend once on the whole image, crop back."""
    if align % backend.divisor:
        raise ContractError(
            f"alignment {align} is not a multiple of backend divisor {backend.divisor}"
        )
    padded, spec = pad_to_multiple(img, align)
    out = _checked_apply(backend, padded, "the full image")
    return crop(out, spec)


def deband_weighted(
    backend: DebandBackend,
    img: ImageBuffer,
    tile: int = TILE,
    stride: int = STRIDE,
    workers: int = 1,
) -> ImageBuffer:
    """Pad, deband every overlapping tile, fuse with reciprocal-distance weights, crop.

    stride must be tile/2 so every pixel is covered by 1, 2 or 4 tiles. Tiles
    may run concurrently; the fused result is identical for any worker count.
    """
    if stride * 2 != tile:
        raise ContractError(f"weighted mode requires stride = tile/2, got {stride} vs {tile}")
    if tile % backend.divisor:
        raise ContractError(
            f"tile {tile} is not a multiple of backend divisor {backend.divisor}"
        )
    padded, spec = pad_to_multiple(img, tile)
    grid = plan_grid(padded.width, padded.height, tile, stride)

    def run_tile(t):
        window = extract_window(padded, t.x0, t.y0, tile, tile)
        return _checked_apply(backend, window, f"tile at ({t.x0},{t.y0})")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(run_tile, grid.tiles))
    else:
        outputs = [run_tile(t) for t in grid.tiles]
    fused = fuse_weighted(grid, outputs, workers=workers)
    return crop(fused, spec)
