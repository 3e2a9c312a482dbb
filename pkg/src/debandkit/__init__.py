"""debandkit: banding artifact removal toolkit.

A from-scratch U-Net inference engine with a bit-exact weight interchange
format, whole-image and overlapping-tile weighted-fusion application modes, a
classical threshold-gated deband baseline, paired patch dataset construction
with content-disjoint splitting, and evaluation/timing harnesses.
"""

from .baseline import ClassicDebandParams, classic_deband
from .bench import BenchSummary, TimingRecord, time_method
from .dataset import (
    DatasetManifest,
    PatchPairRecord,
    SourceRecord,
    extract_banded_pairs,
    read_manifest,
    split_by_content,
    verify_manifest,
    write_manifest,
)
from .errors import AlignmentError, ContractError, DebandError
from .generator import (
    GeneratorModel,
    forward,
    load_weights,
    seeded_generator,
    zero_generator,
)
from .imagebuf import ImageBuffer, PadSpec, crop, extract_window, pad_to_multiple
from .metrics import DebandReport, aggregate, band_edge_density, psnr
from .pipeline import (
    ClassicBackend,
    GeneratorBackend,
    IdentityBackend,
    deband_full,
    deband_weighted,
)
from .tiling import TileGrid, TileRef, coverage_count, fuse_weighted, plan_grid

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BenchSummary",
    "ClassicBackend",
    "ClassicDebandParams",
    "ContractError",
    "DatasetManifest",
    "DebandError",
    "DebandReport",
    "GeneratorBackend",
    "GeneratorModel",
    "IdentityBackend",
    "ImageBuffer",
    "PadSpec",
    "PatchPairRecord",
    "SourceRecord",
    "TileGrid",
    "TileRef",
    "TimingRecord",
    "aggregate",
    "band_edge_density",
    "classic_deband",
    "coverage_count",
    "crop",
    "deband_full",
    "deband_weighted",
    "extract_banded_pairs",
    "extract_window",
    "forward",
    "fuse_weighted",
    "load_weights",
    "pad_to_multiple",
    "plan_grid",
    "psnr",
    "read_manifest",
    "seeded_generator",
    "split_by_content",
    "time_method",
    "verify_manifest",
    "write_manifest",
    "zero_generator",
]
