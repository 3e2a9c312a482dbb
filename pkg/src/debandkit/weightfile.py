"""Bit-exact binary tensor interchange format.

Layout:

    bytes 0..4    magic  b"DBW1"
    bytes 4..8    u32 little-endian manifest length L
    bytes 8..8+L  manifest, UTF-8 JSON:
                  {"tensors": [{"layer", "role", "shape", "offset", "nbytes"}, ...]}
    bytes 8+L..   blobs, little-endian float32, contiguous in manifest order

Offsets are relative to the end of the manifest. Every expected tensor must
appear exactly once with its exact shape; blobs may not overlap, leave gaps,
or be followed by trailing bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import DebandError

MAGIC = b"DBW1"

TensorKey = tuple[str, str]  # (layer, role)


class WeightFileError(DebandError):
    """Base class for weight-file load/save failures."""


class BadMagicError(WeightFileError):
    pass


class ManifestError(WeightFileError):
    pass


class MissingTensorError(WeightFileError):
    pass


class DuplicateTensorError(WeightFileError):
    pass


class TensorShapeError(WeightFileError):
    pass


class BlobLayoutError(WeightFileError):
    pass


class TrailingDataError(WeightFileError):
    pass


def write_weight_file(path, tensors: list[tuple[str, str, np.ndarray]]) -> None:
    """Serialize (layer, role, array) triples; arrays are stored as float32."""
    entries = []
    offset = 0
    blobs = []
    for layer, role, arr in tensors:
        blob = np.ascontiguousarray(arr, dtype="<f4")
        entries.append(
            {
                "layer": layer,
                "role": role,
                "shape": list(blob.shape),
                "offset": offset,
                "nbytes": blob.nbytes,
            }
        )
        blobs.append(blob)
        offset += blob.nbytes
    manifest = json.dumps({"tensors": entries}, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(manifest)))
        f.write(manifest)
        for blob in blobs:
            f.write(blob.tobytes())


def read_weight_file(
    path, expected: list[tuple[str, str, tuple[int, ...]]]
) -> dict[TensorKey, np.ndarray]:
    """Load and validate against the expected (layer, role, shape) table."""
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a weight file (magic {raw[:4]!r}, expected {MAGIC!r})")
    (manifest_len,) = struct.unpack("<I", raw[4:8])
    if 8 + manifest_len > len(raw):
        raise ManifestError(f"{path}: manifest length {manifest_len} exceeds file size")
    try:
        manifest = json.loads(raw[8 : 8 + manifest_len].decode("utf-8"))
        entries = manifest["tensors"]
    except (ValueError, KeyError, UnicodeDecodeError) as e:
        raise ManifestError(f"{path}: malformed manifest: {e}") from e

    expected_shapes = {(layer, role): tuple(shape) for layer, role, shape in expected}
    blob_base = 8 + manifest_len
    seen: dict[TensorKey, np.ndarray] = {}
    spans = []
    for entry in entries:
        try:
            key = (entry["layer"], entry["role"])
            shape = tuple(int(s) for s in entry["shape"])
            offset = int(entry["offset"])
            nbytes = int(entry["nbytes"])
        except (KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"{path}: malformed tensor entry {entry!r}") from e
        if key not in expected_shapes:
            raise ManifestError(f"{path}: unexpected tensor {key[0]}/{key[1]}")
        if key in seen:
            raise DuplicateTensorError(f"{path}: tensor {key[0]}/{key[1]} appears twice")
        if shape != expected_shapes[key]:
            raise TensorShapeError(
                f"{path}: layer {key[0]} {key[1]} has shape {shape}, "
                f"expected {expected_shapes[key]}"
            )
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if nbytes != 4 * count:
            raise BlobLayoutError(
                f"{path}: layer {key[0]} {key[1]} declares {nbytes} bytes for shape {shape}"
            )
        if offset < 0 or blob_base + offset + nbytes > len(raw):
            raise BlobLayoutError(f"{path}: layer {key[0]} {key[1]} blob out of bounds")
        data = np.frombuffer(raw, dtype="<f4", count=count, offset=blob_base + offset)
        seen[key] = data.reshape(shape).copy()
        spans.append((offset, offset + nbytes, key))

    for layer, role, _ in expected:
        if (layer, role) not in seen:
            raise MissingTensorError(f"{path}: missing tensor {layer}/{role}")

    spans.sort()
    cursor = 0
    for start, end, key in spans:
        if start != cursor:
            raise BlobLayoutError(
                f"{path}: blob for {key[0]}/{key[1]} at offset {start} overlaps or leaves a gap"
            )
        cursor = end
    if blob_base + cursor != len(raw):
        raise TrailingDataError(
            f"{path}: {len(raw) - blob_base - cursor} trailing bytes after the last blob"
        )
    return seen
