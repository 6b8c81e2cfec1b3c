"""Command line entry point: ``transmask <subcommand> ...``.

Exit codes: 0 success, 1 validation/format error, 2 I/O error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import baseline, dataset_io, losses, metrics
from .core import MaskingConfig, TransmaskError
from .maskgen import artificial_hole
from .pipeline import SynthesisOptions, synthesize_dataset

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3
JOBS_ENV = "TRANSMASK_JOBS"

log = logging.getLogger("transmask")


class CliError(Exception):
    def __init__(self, message, code=EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _default_jobs():
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _odd_size(text):
    w, _, h = text.lower().partition("x")
    try:
        return int(w), int(h or w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or WxH, got {text!r}")


# ---------------------------------------------------------------- subcommands


def cmd_synthesize(args):
    cfg = MaskingConfig(
        erosion_element=args.erosion_size,
        erosion_iterations=args.erosion_iters,
        erosion_enabled=not args.no_erosion,
        per_instance=not args.erode_union,
    )
    opts = SynthesisOptions(
        masking=cfg, seed=args.seed, augment=args.augment, noise_sigma=args.noise_sigma
    )
    outcomes = synthesize_dataset(args.root, args.out, opts, jobs=args.jobs)
    failed = [o for o in outcomes if o.error]
    print(f"synthesized {len(outcomes) - len(failed)}/{len(outcomes)} frames into {args.out}")
    if failed:
        print("frame\tkind\terror", file=sys.stderr)
        for o in failed:
            print(f"{o.key}\t{o.kind}\t{o.error}", file=sys.stderr)
        return EXIT_IO if all(o.kind == "io" for o in failed) else EXIT_VALIDATION
    return EXIT_OK


def _png_index(directory, what):
    directory = Path(directory)
    if not directory.is_dir():
        raise CliError(f"{what} directory {directory} does not exist", EXIT_IO)
    return {p.relative_to(directory).as_posix(): p for p in sorted(directory.rglob("*.png"))}


def cmd_evaluate(args):
    preds = _png_index(args.pred_dir, "prediction")
    gts = _png_index(args.gt_dir, "ground-truth")
    masks = _png_index(args.mask_dir, "mask")
    missing = [(n, kind) for n in preds for kind, idx in (("gt", gts), ("mask", masks)) if n not in idx]
    if missing:
        raise CliError("; ".join(f"{n}: no matching {k} file" for n, k in missing))
    if not preds:
        raise CliError(f"no prediction images in {args.pred_dir}")

    total = metrics.MetricAccumulator()
    per_frame = {}
    for name, p in preds.items():
        pred = dataset_io.load_depth(p, args.depth_scale)
        gt = dataset_io.load_depth(gts[name], args.depth_scale)
        mask = dataset_io.load_mask(masks[name])
        total.add(pred, gt, mask)
        if args.per_frame:
            try:
                per_frame[name] = metrics.evaluate(pred, gt, mask).to_dict()
            except metrics.EmptyEvaluationError:
                per_frame[name] = None
    report = total.report()
    print(report.to_line())
    if args.report:
        out = {"aggregate": report.to_dict(), "frames": len(preds)}
        if args.per_frame:
            out["per_frame"] = per_frame
        Path(args.report).write_text(json.dumps(out, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def cmd_error_map(args):
    pred = dataset_io.load_depth(args.pred, args.depth_scale)
    gt = dataset_io.load_depth(args.gt, args.depth_scale)
    mask = dataset_io.load_mask(args.mask)
    img = metrics.error_map(pred, gt, mask, args.max_rel)
    dataset_io.save_rgb(args.out, img)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_loss_report(args):
    pair = dataset_io.read_pair(args.gt_pair_dir)
    k = pair.meta.get("intrinsics")
    if k is None:
        raise CliError(f"{args.gt_pair_dir}: pair manifest has no camera intrinsics")
    scale = pair.meta["depth_scale"]
    pred = dataset_io.load_depth(args.pred, scale)
    gt = dataset_io.load_depth(args.gt_full, scale) if args.gt_full else pair.target_depth
    br = losses.supervised_loss(
        pred, gt, pair.trans_mask, k, alpha=args.alpha, beta=args.beta, require_gt=not args.keep_invalid
    )
    print(
        f"l1={br.l1:.9g} l2={br.l2:.9g} combined={br.combined:.9g} n1={br.n1} n2={br.n2}"
    )
    return EXIT_OK


def cmd_baseline_complete(args):
    pair = dataset_io.read_pair(args.pair_dir)
    scale = pair.meta["depth_scale"]
    hole = artificial_hole(pair)
    res = baseline.complete_depth(pair.masked_depth, hole, args.max_iter, args.tol)
    out = Path(args.out) if args.out else Path(args.pair_dir) / "completed.png"
    dataset_io.save_depth(out, res.depth, scale)
    print(
        f"wrote {out} iterations={res.iterations} converged={res.converged} "
        f"unfilled_components={len(res.unfilled_components)}"
    )
    if args.evaluate:
        if hole.count():
            print(metrics.evaluate(res.depth, pair.target_depth, hole).to_line())
        else:
            print("no masked pixels to evaluate")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transmask",
        description="Self-supervised masking, losses and evaluation for transparent-object depth completion.",
    )
    parser.add_argument("--config", help="JSON file of flag defaults, keyed by subcommand")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="build masked training pairs for every frame")
    p.add_argument("--root", required=True, help="dataset root (scene_*/frame_* layout)")
    p.add_argument("--out", required=True, help="output directory for pair bundles")
    p.add_argument("--erosion-iters", type=int, default=3, help="erosion repetitions (default 3)")
    p.add_argument(
        "--erosion-size", type=_odd_size, default=(5, 5), help="element size N or WxH (default 5x5)"
    )
    p.add_argument("--no-erosion", action="store_true", help="mask whole non-transparent objects")
    p.add_argument(
        "--erode-union", action="store_true", help="erode the union instead of each instance"
    )
    p.add_argument("--seed", type=int, default=0, help="run seed for augmentation (default 0)")
    p.add_argument("--augment", action="store_true", help="random flip, 90-degree rotation, depth noise")
    p.add_argument(
        "--noise-sigma",
        type=float,
        default=dataset_io.DEFAULT_NOISE_SIGMA,
        help="depth noise std in meters when augmenting (default 0.005)",
    )
    p.add_argument(
        "--jobs", type=int, default=_default_jobs(), help=f"worker processes (default ${JOBS_ENV} or 1)"
    )
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("evaluate", help="metrics over transparent pixels, pooled over frames")
    p.add_argument("--pred-dir", required=True, help="predicted 16-bit depth PNGs")
    p.add_argument("--gt-dir", required=True, help="ground-truth depth PNGs with matching names")
    p.add_argument("--mask-dir", required=True, help="transparent masks with matching names")
    p.add_argument("--report", help="write a JSON report here")
    p.add_argument("--per-frame", action="store_true", help="include per-frame reports")
    p.add_argument("--depth-scale", type=float, default=dataset_io.DEFAULT_DEPTH_SCALE)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("error-map", help="colorize relative depth error")
    p.add_argument("--pred", required=True, help="predicted depth PNG")
    p.add_argument("--gt", required=True, help="ground-truth depth PNG")
    p.add_argument("--mask", required=True, help="mask of pixels to colorize")
    p.add_argument(
        "--max-rel", type=float, default=metrics.DEFAULT_MAX_REL, help="relative error shown as pure red"
    )
    p.add_argument("--out", required=True, help="output PNG")
    p.add_argument("--depth-scale", type=float, default=dataset_io.DEFAULT_DEPTH_SCALE)
    p.set_defaults(func=cmd_error_map)

    p = sub.add_parser("loss-report", help="region losses of a prediction against a pair")
    p.add_argument("--pred", required=True, help="predicted depth PNG")
    p.add_argument("--gt-pair-dir", required=True, help="pair directory written by synthesize")
    p.add_argument("--gt-full", help="optional full ground-truth depth PNG (transparent region included)")
    p.add_argument("--alpha", type=float, default=losses.DEFAULT_ALPHA, help="normal term weight (default 0.1)")
    p.add_argument("--beta", type=float, default=losses.DEFAULT_BETA, help="transparent region weight (default 0.9)")
    p.add_argument("--keep-invalid", action="store_true", help="also score pixels with zero ground truth")
    p.set_defaults(func=cmd_loss_report)

    p = sub.add_parser("baseline-complete", help="fill a pair's masked depth by harmonic interpolation")
    p.add_argument("--pair-dir", required=True, help="pair directory written by synthesize")
    p.add_argument("--out", help="output depth PNG (default <pair-dir>/completed.png)")
    p.add_argument("--tol", type=float, default=baseline.DEFAULT_TOL, help="stop when max update < tol (m)")
    p.add_argument("--max-iter", type=int, default=baseline.DEFAULT_MAX_ITER, help="sweep cap")
    p.add_argument("--evaluate", action="store_true", help="print metrics on the masked pixels")
    p.set_defaults(func=cmd_baseline_complete)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        data = json.loads(Path(known.config).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {known.config}: {exc}", EXIT_IO)
    except json.JSONDecodeError as exc:
        raise CliError(f"bad config {known.config}: {exc}")
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, defaults in data.items():
        if name not in subs.choices:
            raise CliError(f"config names unknown subcommand {name!r}")
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        if "erosion_size" in defaults:
            defaults["erosion_size"] = _odd_size(str(defaults["erosion_size"]))
        subs.choices[name].set_defaults(**defaults)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (TransmaskError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
