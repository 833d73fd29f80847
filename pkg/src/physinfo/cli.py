"""Command line front end.

Exit codes: 0 success, 1 runtime or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import codec, image_io, kb as kbmod
from .annotate import DEFAULT_THETA, annotate_description, format_report
from .metrics import adjusted_rand_index, boundary_f_measure
from .pipeline import describe_image
from .pyramid import DEFAULT_STOP_THRESHOLD, build_pyramid
from .segment import SegConfig
from .synth import PRESETS, OverlapError, Rect, Scene, synthesize

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


class _Fail(Exception):
    """Runtime failure reported on stderr with exit status 1."""


def _config(parser, args) -> SegConfig:
    try:
        return SegConfig(args.k_bins, args.min_region_px, args.tau, args.seed_min_px, args.max_refine_iters)
    except ValueError as exc:
        parser.error(str(exc))


def cmd_segment(parser, args) -> int:
    cfg = _config(parser, args)
    if args.stop_threshold < 1:
        parser.error("--stop-threshold must be >= 1")
    try:
        img = image_io.load_image(args.input)
    except FileNotFoundError:
        raise _Fail(f"cannot read {args.input}: no such file")
    except (OSError, image_io.ImageFormatError) as exc:
        raise _Fail(f"cannot read {args.input}: {exc}")
    start = time.perf_counter()
    run = describe_image(img, cfg, args.stop_threshold)
    doc = codec.encode(run.description)
    seconds = time.perf_counter() - start
    report = codec.compression_report(doc, img)

    os.makedirs(args.output, exist_ok=True)
    with open(os.path.join(args.output, "description.physinfo"), "wb") as fh:
        fh.write(doc)
    counts = {}
    for level, lm in enumerate(run.result.labels):
        image_io.save_overlay(lm.labels, os.path.join(args.output, f"overlay_{level}.ppm"))
        counts[level] = len(np.unique(lm.labels))
    rows = ["level\twidth\theight\tregions\tbytes"]
    for level, lm in enumerate(run.result.labels):
        rows.append(f"{level}\t{lm.width}\t{lm.height}\t{counts[level]}\t{report.level_bytes[level]}")
    rows.append("")
    rows.append(f"total_bytes\t{report.total_bytes}")
    rows.append(f"raw_bytes\t{report.raw_bytes}")
    rows.append(f"ratio\t{report.ratio:.4f}")
    rows.append(f"seconds\t{seconds:.4f}")
    with open(os.path.join(args.output, "summary.txt"), "w") as fh:
        fh.write("\n".join(rows) + "\n")

    if args.figures:
        from .plotting import plot_levels, plot_region_counts

        plot_levels(run.pyramid.levels, [lm.labels for lm in run.result.labels],
                    os.path.join(args.output, "levels.png"), os.path.basename(args.input))
        plot_region_counts(counts, os.path.join(args.output, "regions.png"))
    print(f"levels {len(run.result.labels)} regions {counts[0]} ratio {report.ratio:.4f} seconds {seconds:.4f}")
    return EXIT_OK


def _read_description(path) -> codec.PhysicalDescription:
    try:
        with open(path, "rb") as fh:
            return codec.decode(fh.read())
    except OSError as exc:
        raise _Fail(f"cannot read {path}: {exc.strerror or exc}")
    except (codec.DescriptionError, UnicodeDecodeError) as exc:
        raise _Fail(f"{path}: {exc}")


def cmd_reconstruct(parser, args) -> int:
    desc = _read_description(args.description)
    try:
        recon = codec.reconstruct(desc, args.level)
    except codec.UnknownLevelError as exc:
        raise _Fail(str(exc))
    try:
        image_io.save_image(recon, args.output)
    except OSError as exc:
        raise _Fail(f"cannot write {args.output}: {exc.strerror or exc}")
    if args.reference:
        try:
            ref = image_io.load_image(args.reference)
        except (OSError, image_io.ImageFormatError) as exc:
            raise _Fail(f"cannot read {args.reference}: {exc}")
        if ref.shape == (desc.height, desc.width) and recon.shape != ref.shape:
            # full-size reference: compare against its pyramid level
            pyr = build_pyramid(ref, desc.stop_threshold)
            if args.level > pyr.top_level:
                raise _Fail(f"reference pyramid has no level {args.level}")
            ref = pyr[args.level]
        if ref.shape != recon.shape:
            raise _Fail(f"reference is {ref.shape[1]}x{ref.shape[0]}, level {args.level} is "
                        f"{recon.shape[1]}x{recon.shape[0]}")
        rmse = float(np.sqrt(np.mean((recon - ref) ** 2)))
        print(f"rmse {rmse:.6f}")
    return EXIT_OK


def cmd_annotate(parser, args) -> int:
    if not 0 < args.theta <= 1:
        parser.error("--theta must lie in (0, 1]")
    desc = _read_description(args.description)
    if args.kb is None:
        kb_text, kb_name = kbmod.demo_kb_text(), "demo knowledgebase"
    else:
        try:
            with open(args.kb, "rb") as fh:
                kb_text, kb_name = fh.read(), args.kb
        except OSError as exc:
            raise _Fail(f"cannot read {args.kb}: {exc.strerror or exc}")
    try:
        kb = kbmod.parse_kb(kb_text)
    except (kbmod.KBParseError, UnicodeDecodeError) as exc:
        raise _Fail(f"{kb_name}: {exc}")
    sys.stdout.write(format_report(annotate_description(desc, kb, args.theta)))
    return EXIT_OK


def _parse_size(text: str) -> tuple[int, int]:
    w, sep, h = text.lower().partition("x")
    try:
        if not sep:
            raise ValueError
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must be WxH, got {text!r}") from None


def _parse_rect(text: str) -> Rect:
    try:
        return Rect.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _truth_path(out: str) -> str:
    stem, ext = os.path.splitext(out)
    return f"{stem}_truth{ext or '.pgm'}"


def cmd_synth(parser, args) -> int:
    if args.sigma < 0:
        parser.error("--sigma must be non-negative")
    if args.preset is not None:
        if args.preset not in PRESETS:
            parser.error(f"unknown preset {args.preset!r} (choose from {', '.join(sorted(PRESETS))})")
        if args.rect or args.size:
            parser.error("a preset cannot be combined with --rect or --size")
        scene = PRESETS[args.preset]
    else:
        if not args.size:
            parser.error("give a preset name or --size with --rect shapes")
        w, h = args.size
        scene = Scene(w, h, args.background, tuple(args.rect or ()))
    try:
        scene.validate()
    except OverlapError as exc:
        print(f"error: {exc} (ground truth would be ambiguous)", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        parser.error(str(exc))
    if len(scene.rects) > 255:
        parser.error("at most 255 rectangles fit an 8-bit ground-truth map")
    img, truth = synthesize(scene, args.sigma, args.seed)
    truth_out = args.truth or _truth_path(args.output)
    try:
        image_io.save_image(img, args.output)
        image_io.save_image(truth, truth_out)
    except OSError as exc:
        raise _Fail(f"cannot write output: {exc}")
    print(f"wrote {args.output} and {truth_out} ({scene.width}x{scene.height}, {len(scene.rects)} rectangles)")
    return EXIT_OK


def cmd_score(parser, args) -> int:
    maps = []
    for path in (args.a, args.b):
        try:
            maps.append(image_io.load_image(path).astype(np.int64))
        except (OSError, image_io.ImageFormatError) as exc:
            raise _Fail(f"cannot read {path}: {exc}")
    a, b = maps
    if a.shape != b.shape:
        raise _Fail(f"dimension mismatch: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}")
    print(f"ari {adjusted_rand_index(a, b):.4f}")
    print(f"boundary_f {boundary_f_measure(a, b):.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="physinfo", description="Pyramid segmentation, region descriptions "
                                "and knowledgebase annotation of grayscale images.")
    sub = p.add_subparsers(dest="command", required=True)
    d = SegConfig()

    s = sub.add_parser("segment", help="segment an image and write its description")
    s.add_argument("input", help="PGM image (P2 or P5)")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--k-bins", type=int, default=d.k_bins)
    s.add_argument("--tau", type=float, default=d.deviation_tau)
    s.add_argument("--seed-min-px", type=int, default=d.seed_min_px)
    s.add_argument("--max-refine-iters", type=int, default=d.max_refine_iters)
    s.add_argument("--min-region-px", type=int, default=d.min_region_px)
    s.add_argument("--stop-threshold", type=int, default=DEFAULT_STOP_THRESHOLD)
    s.add_argument("--figures", action="store_true", help="also render levels.png and regions.png")
    s.set_defaults(func=cmd_segment)

    r = sub.add_parser("reconstruct", help="paint a level from a description")
    r.add_argument("description")
    r.add_argument("--level", type=int, default=0)
    r.add_argument("-o", "--output", required=True, help="output PGM")
    r.add_argument("--reference", help="image to report RMSE against (full size or level size)")
    r.set_defaults(func=cmd_reconstruct)

    a = sub.add_parser("annotate", help="label regions of a description from a knowledgebase")
    a.add_argument("description")
    a.add_argument("kb", nargs="?", help="knowledgebase file (default: built-in demo)")
    a.add_argument("--theta", type=float, default=DEFAULT_THETA)
    a.set_defaults(func=cmd_annotate)

    y = sub.add_parser("synth", help="render a rectangle scene and its ground truth")
    y.add_argument("preset", nargs="?", help=f"one of: {', '.join(PRESETS)}")
    y.add_argument("--rect", type=_parse_rect, action="append", metavar="X0,Y0,X1,Y1,MEAN")
    y.add_argument("--size", type=_parse_size, metavar="WxH")
    y.add_argument("--background", type=float, default=0.0)
    y.add_argument("--sigma", type=float, default=0.0)
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("-o", "--output", required=True, help="output PGM")
    y.add_argument("--truth", help="ground-truth PGM (default: <output>_truth.pgm)")
    y.set_defaults(func=cmd_synth)

    c = sub.add_parser("score", help="compare two label maps")
    c.add_argument("a")
    c.add_argument("b")
    c.set_defaults(func=cmd_score)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
