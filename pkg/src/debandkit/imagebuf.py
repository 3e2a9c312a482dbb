"""8-bit RGB image buffers, mirror padding to tile-aligned sizes, and cropping.

Every image in the pipeline is an interleaved H x W x 3 uint8 raster. Padding
records a PadSpec so cropping is its exact inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

CHANNELS = 3


class ImageBuffer:
    """Immutable interleaved 8-bit RGB raster (row-major H x W x 3)."""

    __slots__ = ("array",)

    def __init__(self, array: np.ndarray):
        arr = np.array(array, dtype=np.uint8, copy=True, order="C")
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise ContractError(f"expected an HxWx3 raster, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ContractError(f"image dimensions must be >= 1, got {arr.shape[1]}x{arr.shape[0]}")
        arr.flags.writeable = False
        object.__setattr__(self, "array", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ImageBuffer is immutable")

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def channels(self) -> int:
        return CHANNELS

    def tobytes(self) -> bytes:
        return self.array.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.array.shape == other.array.shape and np.array_equal(self.array, other.array)

    def __repr__(self) -> str:
        return f"ImageBuffer({self.width}x{self.height})"

    @classmethod
    def full(cls, width: int, height: int, value) -> "ImageBuffer":
        """Constant image; `value` is a scalar or an RGB triple."""
        arr = np.empty((height, width, CHANNELS), dtype=np.uint8)
        arr[:] = value
        return cls(arr)


@dataclass(frozen=True)
class PadSpec:
    """Amount of padding applied on each side, so crop() can invert it."""

    left: int
    right: int
    top: int
    bottom: int
    mode: str = "mirror"

    def __post_init__(self):
        if min(self.left, self.right, self.top, self.bottom) < 0:
            raise ContractError(f"pad amounts must be >= 0, got {self}")
        if self.mode != "mirror":
            raise ContractError(f"unsupported pad mode {self.mode!r}")

    @property
    def is_zero(self) -> bool:
        return self.left == self.right == self.top == self.bottom == 0


def pad_to_multiple(img: ImageBuffer, multiple: int) -> tuple[ImageBuffer, PadSpec]:
    """Mirror-pad `img` so both dimensions become multiples of `multiple`.

    Output dimensions are the smallest multiples of `multiple` that are
    >= max(dim, multiple). The pad total splits floor/2 on the left/top and
    the remainder on the right/bottom, keeping the content centered. The
    mirror includes the edge pixel (symmetric mode) and repeats reflections
    when the pad exceeds the source dimension, so any size >= 1x1 works.
    """
    if multiple < 1:
        raise ContractError(f"multiple must be >= 1, got {multiple}")
    target_w = ((max(img.width, multiple) + multiple - 1) // multiple) * multiple
    target_h = ((max(img.height, multiple) + multiple - 1) // multiple) * multiple
    pad_w = target_w - img.width
    pad_h = target_h - img.height
    spec = PadSpec(
        left=pad_w // 2,
        right=pad_w - pad_w // 2,
        top=pad_h // 2,
        bottom=pad_h - pad_h // 2,
    )
    if spec.is_zero:
        return img, spec
    padded = np.pad(
        img.array,
        ((spec.top, spec.bottom), (spec.left, spec.right), (0, 0)),
        mode="symmetric",
    )
    return ImageBuffer(padded), spec


def crop(img: ImageBuffer, spec: PadSpec) -> ImageBuffer:
    """Remove the padding recorded in `spec`; exact inverse of pad_to_multiple."""
    out_w = img.width - spec.left - spec.right
    out_h = img.height - spec.top - spec.bottom
    if out_w < 1 or out_h < 1:
        raise ContractError(
            f"pad spec {spec} leaves no interior for a {img.width}x{img.height} image"
        )
    return ImageBuffer(img.array[spec.top : spec.top + out_h, spec.left : spec.left + out_w])


def extract_window(img: ImageBuffer, x0: int, y0: int, w: int, h: int) -> ImageBuffer:
    """Copy the w x h region with top-left corner (x0, y0); must lie inside the image."""
    if w < 1 or h < 1:
        raise ContractError(f"window size must be >= 1, got {w}x{h}")
    if x0 < 0 or y0 < 0 or x0 + w > img.width or y0 + h > img.height:
        raise ContractError(
            f"window {w}x{h}@({x0},{y0}) exceeds image bounds {img.width}x{img.height}"
        )
    return ImageBuffer(img.array[y0 : y0 + h, x0 : x0 + w])
