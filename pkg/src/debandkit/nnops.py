"""CPU kernels for the generator: 4x4 stride-2 convolutions (down and
transposed up), instance normalization, and the activations.

Tensors are dense CHW float arrays. The convolutions run as im2col/col2im
matmuls, chunked over rows so peak scratch memory stays bounded on large
images.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ContractError

KERNEL = 4
STRIDE = 2
PAD = 1
NORM_EPS = 1e-5
CHUNK_BYTES = 128 << 20  # scratch budget per im2col/col2im block


def conv_down(x: np.ndarray, w: np.ndarray, b: np.ndarray, chunk_bytes: int = CHUNK_BYTES) -> np.ndarray:
    """4x4 stride-2 pad-1 convolution; (C,H,W) -> (O,H/2,W/2).

    Weight layout (O, C, 4, 4), cross-correlation orientation.
    """
    c, h, wd = x.shape
    o = w.shape[0]
    if w.shape != (o, c, KERNEL, KERNEL):
        raise ContractError(f"conv_down weight shape {w.shape} does not match input channels {c}")
    if h % 2 or wd % 2:
        raise ContractError(f"conv_down needs even spatial dims, got {h}x{wd}")
    xp = np.zeros((c, h + 2 * PAD, wd + 2 * PAD), dtype=x.dtype)
    xp[:, PAD : PAD + h, PAD : PAD + wd] = x
    # [C, H/2, W/2, 4, 4] strided view of every window
    win = sliding_window_view(xp, (KERNEL, KERNEL), axis=(1, 2))[:, ::STRIDE, ::STRIDE]
    oh, ow = h // 2, wd // 2
    wm = w.reshape(o, c * KERNEL * KERNEL).astype(x.dtype, copy=False)
    out = np.empty((o, oh, ow), dtype=x.dtype)
    rows = max(1, chunk_bytes // max(1, ow * c * KERNEL * KERNEL * x.itemsize))
    for r0 in range(0, oh, rows):
        r1 = min(oh, r0 + rows)
        cols = win[:, r0:r1].transpose(1, 2, 0, 3, 4).reshape((r1 - r0) * ow, -1)
        out[:, r0:r1] = (wm @ cols.T).reshape(o, r1 - r0, ow)
    out += b.astype(x.dtype, copy=False)[:, None, None]
    return out


def conv_up(x: np.ndarray, w: np.ndarray, b: np.ndarray, chunk_bytes: int = CHUNK_BYTES) -> np.ndarray:
    """4x4 stride-2 pad-1 transposed convolution; (C,H,W) -> (O,2H,2W).

    Weight layout (C, O, 4, 4): output pixel (2*iy-1+ky, 2*ix-1+kx) receives
    x[c, iy, ix] * w[c, o, ky, kx].
    """
    c, h, wd = x.shape
    if w.ndim != 4 or w.shape[0] != c or w.shape[2:] != (KERNEL, KERNEL):
        raise ContractError(f"conv_up weight shape {w.shape} does not match input channels {c}")
    o = w.shape[1]
    wm = w.reshape(c, o * KERNEL * KERNEL).astype(x.dtype, copy=False)
    # one-pixel margins absorb the pad-1 offset; trimmed at the end
    ext = np.zeros((o, 2 * h + 2, 2 * wd + 2), dtype=x.dtype)
    rows = max(1, chunk_bytes // max(1, wd * o * KERNEL * KERNEL * x.itemsize))
    for r0 in range(0, h, rows):
        r1 = min(h, r0 + rows)
        xc = x[:, r0:r1].reshape(c, (r1 - r0) * wd)
        cols = (wm.T @ xc).reshape(o, KERNEL, KERNEL, r1 - r0, wd)
        for ky in range(KERNEL):
            for kx in range(KERNEL):
                ext[:, 2 * r0 + ky : 2 * r1 + ky : 2, kx : kx + 2 * wd : 2] += cols[:, ky, kx]
    out = ext[:, PAD : PAD + 2 * h, PAD : PAD + 2 * wd]
    out += b.astype(x.dtype, copy=False)[:, None, None]
    return out


def instance_norm(x: np.ndarray, eps: float = NORM_EPS) -> np.ndarray:
    """Per-channel zero-mean unit-variance over the spatial plane (no affine)."""
    mean = x.mean(axis=(1, 2), keepdims=True)
    var = x.var(axis=(1, 2), keepdims=True)
    return (x - mean) / np.sqrt(var + eps)


def leaky_relu(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    return np.where(x > 0, x, x * np.asarray(slope, dtype=x.dtype))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)
