"""Paired banded/pristine patch dataset: extraction, content-disjoint
splitting, and manifest verification.

Patches are cut on a sliding-window grid (no extra edge-aligned window) and a
window is kept when the fraction of banded mask pixels inside it reaches tau.
All patches from one source image always land in the same split. The manifest
is JSON-lines: one meta line followed by one line per patch pair, with patch
paths relative to the manifest's directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import imageio
from .errors import ContractError
from .imagebuf import ImageBuffer

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SourceRecord:
    image_id: str
    banded_image: str
    pristine_image: str
    band_mask: str


@dataclass(frozen=True)
class PatchPairRecord:
    image_id: str
    x0: int
    y0: int
    banded_patch: str
    pristine_patch: str
    banded_fraction: float
    split: str | None = None


@dataclass
class DatasetManifest:
    records: list[PatchPairRecord]
    patch: int = 256
    stride: int = 75
    tau: float = 0.5
    ratios: tuple[float, float, float] | None = None
    seed: int | None = None

    @property
    def split_of(self) -> dict[str, str | None]:
        """First split seen per image id (conflicts are verify_manifest's job)."""
        out: dict[str, str | None] = {}
        for r in self.records:
            out.setdefault(r.image_id, r.split)
        return out


def window_positions(dim: int, patch: int, stride: int) -> list[int]:
    """k*stride for every k with k*stride + patch <= dim."""
    if dim < patch:
        return []
    return list(range(0, dim - patch + 1, stride))


def extract_banded_pairs(
    src: SourceRecord,
    out_dir,
    patch: int = 256,
    stride: int = 75,
    tau: float = 0.5,
) -> list[PatchPairRecord]:
    """Cut aligned banded/pristine patches wherever the mask is banded enough.

    Writes {image_id}_{x0}_{y0}_{banded|pristine}.png under out_dir and returns
    the records with paths relative to out_dir.
    """
    if not 0.0 <= tau <= 1.0:
        raise ContractError(f"tau must be in [0, 1], got {tau}")
    banded = imageio.load_image(src.banded_image)
    pristine = imageio.load_image(src.pristine_image)
    mask = imageio.load_mask(src.band_mask)
    if (banded.height, banded.width) != (pristine.height, pristine.width) or mask.shape != (
        banded.height,
        banded.width,
    ):
        raise ContractError(
            f"{src.image_id}: banded {banded.width}x{banded.height}, "
            f"pristine {pristine.width}x{pristine.height}, mask {mask.shape[1]}x{mask.shape[0]} "
            "must all share dimensions"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    binary = (mask != 0).astype(np.int64)
    integral = np.zeros((banded.height + 1, banded.width + 1), dtype=np.int64)
    integral[1:, 1:] = binary.cumsum(axis=0).cumsum(axis=1)
    area = float(patch * patch)

    records = []
    for y0 in window_positions(banded.height, patch, stride):
        for x0 in window_positions(banded.width, patch, stride):
            covered = (
                integral[y0 + patch, x0 + patch]
                - integral[y0, x0 + patch]
                - integral[y0 + patch, x0]
                + integral[y0, x0]
            )
            fraction = covered / area
            if fraction < tau:
                continue
            banded_name = f"{src.image_id}_{x0}_{y0}_banded.png"
            pristine_name = f"{src.image_id}_{x0}_{y0}_pristine.png"
            imageio.save_image(
                ImageBuffer(banded.array[y0 : y0 + patch, x0 : x0 + patch]),
                out_dir / banded_name,
            )
            imageio.save_image(
                ImageBuffer(pristine.array[y0 : y0 + patch, x0 : x0 + patch]),
                out_dir / pristine_name,
            )
            records.append(
                PatchPairRecord(
                    image_id=src.image_id,
                    x0=x0,
                    y0=y0,
                    banded_patch=banded_name,
                    pristine_patch=pristine_name,
                    banded_fraction=fraction,
                )
            )
    return records


def split_by_content(
    records: list[PatchPairRecord],
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2),
    rng_seed: int = 0,
    patch: int = 256,
    stride: int = 75,
    tau: float = 0.5,
) -> DatasetManifest:
    """Assign whole image ids to train/val/test, chasing the patch-count ratios.

    Ids are taken in order of descending patch count (ties by id) and each goes
    to the split with the largest relative deficit (target minus assigned,
    relative to target; ties in split order). Deterministic for fixed inputs;
    rng_seed is recorded in the manifest but the assignment itself never draws
    from it.
    """
    if len(ratios) != len(SPLITS):
        raise ContractError(f"expected {len(SPLITS)} ratios, got {len(ratios)}")
    if min(ratios) <= 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ContractError(f"ratios must be positive and sum to 1, got {ratios}")
    counts: dict[str, int] = {}
    for r in records:
        counts[r.image_id] = counts.get(r.image_id, 0) + 1
    if len(counts) < len(SPLITS):
        raise ContractError(
            f"need at least {len(SPLITS)} distinct image ids to split, got {len(counts)}"
        )
    total = len(records)
    targets = [ratio * total for ratio in ratios]
    assigned = [0.0] * len(SPLITS)
    split_for: dict[str, str] = {}
    for image_id in sorted(counts, key=lambda i: (-counts[i], i)):
        deficits = [(t - a) / t for t, a in zip(targets, assigned)]
        best = max(range(len(SPLITS)), key=lambda i: (deficits[i], -i))
        split_for[image_id] = SPLITS[best]
        assigned[best] += counts[image_id]
    new_records = [replace(r, split=split_for[r.image_id]) for r in records]
    return DatasetManifest(
        records=new_records, patch=patch, stride=stride, tau=tau,
        ratios=tuple(ratios), seed=rng_seed,
    )


@dataclass(frozen=True)
class Violation:
    kind: str
    image_id: str
    detail: str


def verify_manifest(
    manifest: DatasetManifest, base_dir, max_pair_mad: float = 16.0
) -> list[Violation]:
    """Check disjointness, file existence, patch dimensions, and pair alignment.

    Reports violations instead of raising. max_pair_mad bounds the mean
    absolute difference between a banded patch and its pristine counterpart
    (aligned pairs differ only by quantization).
    """
    base = Path(base_dir)
    violations: list[Violation] = []

    splits_seen: dict[str, set] = {}
    for r in manifest.records:
        splits_seen.setdefault(r.image_id, set()).add(r.split)
    for image_id, seen in sorted(splits_seen.items()):
        if len(seen) > 1:
            violations.append(
                Violation("split-conflict", image_id, f"image id spans splits {sorted(map(str, seen))}")
            )

    for r in manifest.records:
        if not 0.0 <= r.banded_fraction <= 1.0:
            violations.append(
                Violation("bad-fraction", r.image_id, f"banded_fraction {r.banded_fraction} outside [0, 1]")
            )
        patches = []
        for path in (r.banded_patch, r.pristine_patch):
            full = base / path
            if not full.is_file():
                violations.append(Violation("missing-file", r.image_id, f"{path} not found"))
                patches.append(None)
                continue
            try:
                img = imageio.load_image(full)
            except Exception as e:  # undecodable file is a data defect, not a crash
                violations.append(Violation("bad-file", r.image_id, f"{path}: {e}"))
                patches.append(None)
                continue
            if img.width != manifest.patch or img.height != manifest.patch:
                violations.append(
                    Violation(
                        "bad-dimensions",
                        r.image_id,
                        f"{path} is {img.width}x{img.height}, expected {manifest.patch}x{manifest.patch}",
                    )
                )
                patches.append(None)
            else:
                patches.append(img)
        if patches[0] is not None and patches[1] is not None:
            mad = float(
                np.mean(np.abs(patches[0].array.astype(np.float64) - patches[1].array.astype(np.float64)))
            )
            if mad > max_pair_mad:
                violations.append(
                    Violation(
                        "pair-mismatch",
                        r.image_id,
                        f"patch pair at ({r.x0},{r.y0}) differs by MAD {mad:.2f} > {max_pair_mad}",
                    )
                )
    return violations


def write_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w") as f:
        meta = {
            "kind": "meta",
            "patch": manifest.patch,
            "stride": manifest.stride,
            "tau": manifest.tau,
            "ratios": list(manifest.ratios) if manifest.ratios else None,
            "seed": manifest.seed,
        }
        f.write(json.dumps(meta, separators=(",", ":")) + "\n")
        for r in manifest.records:
            row = {
                "kind": "record",
                "image_id": r.image_id,
                "x0": r.x0,
                "y0": r.y0,
                "banded_patch": r.banded_patch,
                "pristine_patch": r.pristine_patch,
                "banded_fraction": r.banded_fraction,
                "split": r.split,
            }
            f.write(json.dumps(row, separators=(",", ":")) + "\n")


def read_manifest(path) -> DatasetManifest:
    records = []
    meta = None
    with open(path) as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except ValueError as e:
                raise ContractError(f"{path}:{line_no}: not valid JSON: {e}") from e
            kind = obj.get("kind")
            if kind == "meta":
                meta = obj
            elif kind == "record":
                try:
                    records.append(
                        PatchPairRecord(
                            image_id=obj["image_id"],
                            x0=int(obj["x0"]),
                            y0=int(obj["y0"]),
                            banded_patch=obj["banded_patch"],
                            pristine_patch=obj["pristine_patch"],
                            banded_fraction=float(obj["banded_fraction"]),
                            split=obj.get("split"),
                        )
                    )
                except (KeyError, TypeError, ValueError) as e:
                    raise ContractError(f"{path}:{line_no}: malformed record: {e}") from e
            else:
                raise ContractError(f"{path}:{line_no}: unknown line kind {kind!r}")
    if meta is None:
        raise ContractError(f"{path}: missing meta line")
    ratios = meta.get("ratios")
    return DatasetManifest(
        records=records,
        patch=int(meta["patch"]),
        stride=int(meta["stride"]),
        tau=float(meta["tau"]),
        ratios=tuple(ratios) if ratios else None,
        seed=meta.get("seed"),
    )
