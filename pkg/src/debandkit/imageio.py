"""PNG decode/encode at the tool boundary.

The rest of the pipeline is format-agnostic and only sees ImageBuffer.
Grayscale inputs are replicated to 3 channels; alpha is dropped.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .errors import DebandError
from .imagebuf import ImageBuffer


def require_png(path: str | os.PathLike) -> str:
    path = os.fspath(path)
    if not path.lower().endswith(".png"):
        raise DebandError(f"only PNG images are supported at the CLI boundary, got {path!r}")
    return path


def load_image(path: str | os.PathLike) -> ImageBuffer:
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return ImageBuffer(np.asarray(rgb))


def load_mask(path: str | os.PathLike) -> np.ndarray:
    """1-channel raster; nonzero marks a banded pixel."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L")).copy()


def save_image(img: ImageBuffer, path: str | os.PathLike) -> None:
    Image.fromarray(img.array, mode="RGB").save(os.fspath(path), format="PNG")


def save_mask(mask: np.ndarray, path: str | os.PathLike) -> None:
    Image.fromarray(mask.astype(np.uint8), mode="L").save(os.fspath(path), format="PNG")
