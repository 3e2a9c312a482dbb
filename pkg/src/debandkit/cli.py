"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 1 processing error. Global flags come
before the subcommand: debandkit [--threads N] [--seed N] [--verbose] CMD ...
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from . import dataset as ds
from . import generator as gen
from . import imageio, metrics
from .baseline import ClassicDebandParams
from .errors import DebandError
from .pipeline import ClassicBackend, GeneratorBackend, deband_full, deband_weighted
from .report import render_metric_table, write_json

log = logging.getLogger("debandkit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="debandkit",
        description="Banding artifact removal: dataset tooling, debanding, evaluation, timing.",
    )
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads for tiled debanding (default: %(default)s)")
    parser.add_argument("--seed", type=int, default=0, metavar="N",
                        help="seed for the classic filter and split bookkeeping (default: %(default)s)")
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("extract-patches", help="cut banded/pristine patch pairs from labeled images")
    p.add_argument("--banded", required=True, metavar="DIR", help="directory of banded PNGs")
    p.add_argument("--pristine", required=True, metavar="DIR", help="directory of pristine PNGs (same filenames)")
    p.add_argument("--masks", required=True, metavar="DIR", help="directory of 1-channel banding masks (same filenames)")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory for patches and manifest.jsonl")
    p.add_argument("--patch", type=int, default=256, help="patch side length (default: %(default)s)")
    p.add_argument("--stride", type=int, default=75, help="sliding-window stride (default: %(default)s)")
    p.add_argument("--tau", type=float, default=0.5,
                   help="minimum banded-pixel fraction to keep a window (default: %(default)s)")

    p = sub.add_parser("split", help="assign whole source images to train/val/test")
    p.add_argument("--manifest", required=True, metavar="FILE", help="manifest produced by extract-patches")
    p.add_argument("--ratios", default="0.6,0.2,0.2",
                   help="train,val,test patch-count ratios (default: %(default)s)")
    p.add_argument("--seed", type=int, default=None, dest="split_seed", metavar="N",
                   help="recorded split seed (default: 0, the global --seed)")
    p.add_argument("--out", metavar="FILE", help="output manifest (default: rewrite --manifest in place)")

    p = sub.add_parser("verify", help="check a manifest; exits 1 if violations are found")
    p.add_argument("--manifest", required=True, metavar="FILE")
    p.add_argument("--max-pair-mad", type=float, default=16.0,
                   help="max mean abs difference between a patch pair (default: %(default)s)")

    p = sub.add_parser("deband", help="deband one PNG image")
    p.add_argument("--mode", choices=("full", "weighted"), required=True,
                   help="whole-image or overlapping-tile weighted fusion")
    p.add_argument("--backend", choices=("unet", "classic"), required=True)
    p.add_argument("--weights", metavar="FILE", help="generator weight file (required for --backend unet)")
    p.add_argument("--in", dest="in_path", required=True, metavar="IMG", help="input PNG")
    p.add_argument("--out", dest="out_path", required=True, metavar="IMG", help="output PNG")
    p.add_argument("--threshold", type=int, default=5,
                   help="classic filter gate in 8-bit units (default: %(default)s)")
    p.add_argument("--range", type=int, default=16, dest="range_",
                   help="classic filter max reference distance (default: %(default)s)")

    p = sub.add_parser("evaluate", help="score a directory of PNGs and build a mean +/- SD report")
    p.add_argument("--in-dir", required=True, metavar="DIR", help="images to score")
    p.add_argument("--ref-dir", metavar="DIR", help="reference images for PSNR (same filenames)")
    p.add_argument("--report", required=True, metavar="FILE", help="JSON report output path")
    p.add_argument("--label", default="evaluated", help="row label in the table (default: %(default)s)")
    p.add_argument("--scores-csv", metavar="FILE",
                   help="merge per-image external scores: rows of image_id,metric,score")
    p.add_argument("--context-csv", metavar="FILE",
                   help="verbatim aggregate rows: label,metric,mean,sd[,n]")

    p = sub.add_parser("bench", help="time a debanding method over a directory of PNGs")
    p.add_argument("--backend", choices=("unet", "classic", "identity"), required=True)
    p.add_argument("--mode", choices=("full", "weighted"), required=True)
    p.add_argument("--weights", metavar="FILE", help="generator weight file (required for --backend unet)")
    p.add_argument("--in-dir", required=True, metavar="DIR")
    p.add_argument("--repeats", type=int, default=3, help="timed repeats per image (default: %(default)s)")
    p.add_argument("--report", required=True, metavar="FILE", help="JSON report output path")
    p.add_argument("--threshold", type=int, default=5,
                   help="classic filter gate in 8-bit units (default: %(default)s)")
    p.add_argument("--range", type=int, default=16, dest="range_",
                   help="classic filter max reference distance (default: %(default)s)")
    p.add_argument("--context-csv", metavar="FILE",
                   help="reference timings shown as context rows: method,seconds")
    return parser


def _parse_ratios(text: str, parser: argparse.ArgumentParser) -> tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        parser.error(f"--ratios must be three comma-separated numbers, got {text!r}")
    if len(parts) != 3:
        parser.error(f"--ratios must have exactly three values, got {text!r}")
    return parts  # positivity/sum checked by split_by_content


def _png_files(dir_path: str) -> list[Path]:
    d = Path(dir_path)
    if not d.is_dir():
        raise DebandError(f"not a directory: {dir_path}")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise DebandError(f"no PNG files in {dir_path}")
    return files


def _make_backend(args, parser: argparse.ArgumentParser):
    if args.backend == "unet":
        if not args.weights:
            parser.error("--backend unet requires --weights")
        return GeneratorBackend(gen.load_weights(args.weights))
    if args.backend == "classic":
        params = ClassicDebandParams(threshold=args.threshold, range=args.range_, seed=args.seed)
        return ClassicBackend(params)
    from .pipeline import IdentityBackend

    return IdentityBackend()


def _apply_fn(backend, mode: str, workers: int):
    if mode == "full":
        return lambda img: deband_full(backend, img)
    return lambda img: deband_weighted(backend, img, workers=workers)


def cmd_extract_patches(args, parser) -> int:
    banded_files = _png_files(args.banded)
    all_records = []
    for banded_path in banded_files:
        image_id = banded_path.stem
        pristine_path = Path(args.pristine) / banded_path.name
        mask_path = Path(args.masks) / banded_path.name
        for required in (pristine_path, mask_path):
            if not required.is_file():
                raise DebandError(f"{image_id}: missing counterpart {required}")
        src = ds.SourceRecord(image_id, str(banded_path), str(pristine_path), str(mask_path))
        records = ds.extract_banded_pairs(
            src, args.out, patch=args.patch, stride=args.stride, tau=args.tau
        )
        log.info("%s: kept %d patch pairs", image_id, len(records))
        all_records.extend(records)
    manifest = ds.DatasetManifest(
        records=all_records, patch=args.patch, stride=args.stride, tau=args.tau
    )
    out_path = Path(args.out) / "manifest.jsonl"
    ds.write_manifest(manifest, out_path)
    print(f"wrote {len(all_records)} patch pairs from {len(banded_files)} images to {out_path}")
    return 0


def cmd_split(args, parser) -> int:
    ratios = _parse_ratios(args.ratios, parser)
    manifest = ds.read_manifest(args.manifest)
    seed = args.split_seed if args.split_seed is not None else args.seed
    split = ds.split_by_content(
        manifest.records, ratios=ratios, rng_seed=seed,
        patch=manifest.patch, stride=manifest.stride, tau=manifest.tau,
    )
    out_path = args.out or args.manifest
    ds.write_manifest(split, out_path)
    by_split = {name: 0 for name in ds.SPLITS}
    for r in split.records:
        by_split[r.split] += 1
    print(
        f"assigned {len(split.records)} patches: "
        + ", ".join(f"{name}={by_split[name]}" for name in ds.SPLITS)
    )
    return 0


def cmd_verify(args, parser) -> int:
    manifest = ds.read_manifest(args.manifest)
    violations = ds.verify_manifest(
        manifest, Path(args.manifest).parent, max_pair_mad=args.max_pair_mad
    )
    for v in violations:
        print(f"{v.kind}: {v.image_id}: {v.detail}")
    print(f"{len(violations)} violation(s) in {len(manifest.records)} records")
    return 1 if violations else 0


def cmd_deband(args, parser) -> int:
    imageio.require_png(args.in_path)
    imageio.require_png(args.out_path)
    backend = _make_backend(args, parser)
    img = imageio.load_image(args.in_path)
    out = _apply_fn(backend, args.mode, args.threads)(img)
    imageio.save_image(out, args.out_path)
    print(f"debanded {args.in_path} ({img.width}x{img.height}) -> {args.out_path}")
    return 0


def cmd_evaluate(args, parser) -> int:
    per_image: dict[str, dict[str, float]] = {}
    for path in _png_files(args.in_dir):
        img = imageio.load_image(path)
        scores = {"band_edge_density": metrics.band_edge_density(img)}
        if args.ref_dir:
            ref_path = Path(args.ref_dir) / path.name
            if not ref_path.is_file():
                raise DebandError(f"missing reference image {ref_path}")
            scores["psnr"] = metrics.psnr(img, imageio.load_image(ref_path))
        per_image[path.stem] = scores
    if args.scores_csv:
        for image_id, scores in metrics.load_scores_csv(args.scores_csv).items():
            per_image.setdefault(image_id, {}).update(scores)
    report = metrics.aggregate(per_image)
    if args.context_csv:
        report.context = metrics.load_context_csv(args.context_csv)
    write_json(args.report, report.to_jsonable())
    print(render_metric_table(args.label, report))
    print(f"report written to {args.report}")
    return 0


def cmd_bench(args, parser) -> int:
    backend = _make_backend(args, parser)
    images = [(p.stem, imageio.load_image(p)) for p in _png_files(args.in_dir)]
    method = f"{args.backend}-{args.mode}"
    records, summary = bench_mod.time_method(
        _apply_fn(backend, args.mode, args.threads),
        method,
        images,
        repeats=args.repeats,
        workers=args.threads,
    )
    reference = bench_mod.load_reference_timings(args.context_csv) if args.context_csv else []
    write_json(args.report, bench_mod.bench_report_jsonable([summary], records, reference))
    print(bench_mod.render_bench_table([summary], reference))
    print(f"report written to {args.report}")
    return 0


COMMANDS = {
    "extract-patches": cmd_extract_patches,
    "split": cmd_split,
    "verify": cmd_verify,
    "deband": cmd_deband,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args, parser)
    except DebandError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
