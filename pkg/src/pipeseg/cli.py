"""Command-line surface.

    pipeseg prepare <src> <out>
    pipeseg enhance <manifest> --mode {original|clahe|clahe_gamma|dcpd} [...]
    pipeseg evaluate <manifest> <pred-dir> [--threshold F] [...]
    pipeseg curves <manifest> <pred-dir> [--step F] [...]
    pipeseg report <result.json>... --style {table2|table3}
    pipeseg validate <manifest>

Exit codes: 0 success, 1 data errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import DatasetManifest, ingest, split_manifest, validate_manifest
from .enhance import MODES, ClaheConfig, DehazeConfig, EnhanceConfig, GammaConfig, apply_enhancement
from .errors import DataError
from .image import load_image, save_image
from .report import render_table
from .runner import RunConfig, RunResult, run_curves, run_evaluate


def _parse_tiles(value: str) -> tuple[int, int]:
    try:
        x, y = value.lower().split("x")
        return int(x), int(y)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM tile grid, got {value!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipeseg",
        description="Dataset preparation, enhancement, and segmentation evaluation for "
        "underwater pipeline imagery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="ingest a labeled image directory and assign splits")
    p.add_argument("src")
    p.add_argument("out")
    p.add_argument("--no-split", action="store_true", help="skip the 60/20/20 assignment")
    p.add_argument("--jpeg-quality", type=int, default=95)

    p = sub.add_parser("enhance", help="write enhanced PNG copies of the manifest's images")
    p.add_argument("manifest")
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--out", help="output directory (default: <manifest dir>/enhanced_<mode>)")
    p.add_argument("--clip-limit", type=float, default=2.0)
    p.add_argument("--tiles", type=_parse_tiles, default=(8, 8), metavar="NxM")
    p.add_argument("--gamma", type=float, default=0.7)
    p.add_argument("--omega", type=float, default=0.95)
    p.add_argument("--t0", type=float, default=0.1)
    p.add_argument("--patch", type=int, default=15)

    p = sub.add_parser("evaluate", help="score predictions against the test split")
    p.add_argument("manifest")
    p.add_argument("predictions_dir")
    p.add_argument("--threshold", type=float, default=0.5, help="confidence threshold for semantic fusion")
    p.add_argument("--step", type=float, default=0.001, help="confidence sweep step")
    p.add_argument("--iou", type=float, default=0.5, help="mask-IoU threshold for F1 matching")
    p.add_argument("--out", default="evaluation", help="output directory")
    p.add_argument("--label", default="run", help="row label for reports")
    p.add_argument("--enhancement-label", default=None)
    p.add_argument("--enhance-mode", choices=MODES, default="original",
                   help="archive enhanced copies of evaluated images")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("curves", help="emit the confidence threshold sweep as CSV")
    p.add_argument("manifest")
    p.add_argument("predictions_dir")
    p.add_argument("--step", type=float, default=0.001)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--out", default="evaluation")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("report", help="render comparison tables from stored results")
    p.add_argument("results", nargs="+", metavar="result.json")
    p.add_argument("--style", choices=("table2", "table3"), default="table2")
    p.add_argument("--csv", help="also write the CSV rendering to this path")

    p = sub.add_parser("validate", help="check manifest entries for decodability and label sanity")
    p.add_argument("manifest")
    return parser


def _cmd_prepare(args) -> int:
    manifest = ingest(args.src, args.out, jpeg_quality=args.jpeg_quality)
    if not args.no_split:
        manifest = split_manifest(manifest)
        manifest.save(Path(args.out) / "manifest.json")
    print(f"ingested {len(manifest.entries)} images into {args.out}")
    if manifest.excluded:
        print(f"excluded {len(manifest.excluded)} images without labels:")
        for name in manifest.excluded:
            print(f"  {name}")
    if not args.no_split:
        counts = {s: sum(1 for e in manifest.entries if e.split == s) for s in ("train", "val", "test")}
        print(f"split: train={counts['train']} val={counts['val']} test={counts['test']}")
    return 0


def _cmd_enhance(args) -> int:
    manifest = DatasetManifest.load(args.manifest)
    root = Path(args.manifest).parent
    out = Path(args.out) if args.out else root / f"enhanced_{args.mode}"
    out.mkdir(parents=True, exist_ok=True)
    cfg = EnhanceConfig(
        clahe=ClaheConfig(tiles_x=args.tiles[0], tiles_y=args.tiles[1], clip_limit=args.clip_limit),
        gamma=GammaConfig(gamma=args.gamma),
        dehaze=DehazeConfig(patch=args.patch, omega=args.omega, t0=args.t0),
    )
    for entry in manifest.entries:
        buf = load_image(root / entry.image_path)
        enhanced = apply_enhancement(buf, args.mode, cfg)
        save_image(enhanced, out / f"{entry.image_id}.png", format="png")
    print(f"wrote {len(manifest.entries)} {args.mode} images to {out}")
    return 0


def _run_config(args, curves_only=False) -> RunConfig:
    return RunConfig(
        manifest_path=args.manifest,
        predictions_dir=args.predictions_dir,
        output_dir=args.out,
        enhancement_mode="original" if curves_only else args.enhance_mode,
        confidence_threshold=0.5 if curves_only else args.threshold,
        curve_step=args.step,
        iou_threshold=args.iou,
        workers=args.workers,
        label="run" if curves_only else args.label,
        enhancement_label=None if curves_only else args.enhancement_label,
    )


def _cmd_evaluate(args) -> int:
    result = run_evaluate(_run_config(args))
    m = result.dataset_metrics
    print(f"evaluated {m.image_count} images -> {args.out}")
    print(f"  mIoU {m.miou:.4f}  Dice {m.dice:.4f}  HD {m.hd_mean:.2f}  MAD {m.mad_mean:.2f}")
    print(f"  mAP@0.5 {result.ap.ap50:.4f}  mAP@0.5:0.95 {result.ap.ap50_95:.4f}")
    b = result.best_f1
    print(f"  best F1 {b.f1:.4f} at confidence {b.threshold:.3f}")
    return 0


def _cmd_curves(args) -> int:
    points, best = run_curves(_run_config(args, curves_only=True))
    print(f"wrote {len(points)} curve points -> {Path(args.out) / 'curves.csv'}")
    print(f"best F1 {best.f1:.4f} at confidence {best.threshold:.3f} "
          f"(P {best.precision:.4f}, R {best.recall:.4f})")
    return 0


def _cmd_report(args) -> int:
    results = [RunResult.load(p) for p in args.results]
    table = render_table(results, style=args.style)
    print(table.markdown, end="")
    if args.csv:
        Path(args.csv).write_text(table.csv)
    return 0


def _cmd_validate(args) -> int:
    manifest = DatasetManifest.load(args.manifest)
    findings = validate_manifest(manifest, Path(args.manifest).parent)
    if not findings:
        print(f"manifest ok: {len(manifest.entries)} entries")
        return 0
    for f in findings:
        print(f"entry {f.index} ({f.path}): {f.message}")
    print(f"{len(findings)} findings")
    return 1


_COMMANDS = {
    "prepare": _cmd_prepare,
    "enhance": _cmd_enhance,
    "evaluate": _cmd_evaluate,
    "curves": _cmd_curves,
    "report": _cmd_report,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
