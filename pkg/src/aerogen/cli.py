"""Command-line entry points: generate, serve, align, eval."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dataset_io, evalmap, meta_align
from .errors import AerogenError
from .scenario import PRESET_NAMES, ScenarioConfig, load_preset
from .server import ServerConfig, run_server


def _add_generate(sub) -> None:
    p = sub.add_parser("generate", help="run a scenario and write a dataset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESET_NAMES,
                     help="packaged scenario preset")
    src.add_argument("--config", help="path to a scenario config JSON")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--frames", type=int, help="override frame count")
    p.add_argument("--seed", type=int, help="override scenario seed")
    p.add_argument("--width", type=int, help="override image width")
    p.add_argument("--height", type=int, help="override image height")
    p.add_argument("--supersample", type=int,
                   help="override supersampling factor")
    p.add_argument("--quality", choices=("low", "high"),
                   help="override render quality")
    p.add_argument("--val-fraction", type=float, default=0.2,
                   help="validation split fraction (default 0.2)")
    p.add_argument("--meta-only", action="store_true",
                   help="skip PNG encoding; labels and metadata only")
    p.add_argument("--quiet", action="store_true")


def _cmd_generate(args) -> int:
    overrides = {}
    if args.frames is not None:
        overrides["frame_count"] = args.frames
    if args.seed is not None:
        overrides["seed"] = args.seed
    image = {}
    if args.width is not None:
        image["width"] = args.width
    if args.height is not None:
        image["height"] = args.height
    if args.supersample is not None:
        image["supersample"] = args.supersample
    if image:
        overrides["image"] = image
    if args.quality is not None:
        overrides["quality"] = args.quality
    if args.preset:
        config = load_preset(args.preset, overrides=overrides)
    else:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        for key, value in overrides.items():
            if key == "image" and "image" in raw:
                merged = dict(raw["image"])
                merged.update(value)
                raw["image"] = merged
            else:
                raw[key] = value
        config = ScenarioConfig.from_dict(raw)

    def progress(i, n):
        if not args.quiet and (i + 1) % 25 == 0:
            print(f"\r{i + 1}/{n} frames", end="", file=sys.stderr)

    result = dataset_io.generate_dataset(
        config, args.out, val_fraction=args.val_fraction,
        write_images=not args.meta_only, progress=progress)
    if not args.quiet:
        print(file=sys.stderr)
    print(f"wrote {result.frame_count} frames, "
          f"{result.object_boxes} boxes to {result.root}")
    return 0


def _add_serve(sub) -> None:
    p = sub.add_parser("serve", help="run the TCP scenario-control server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=17607)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=360)
    p.add_argument("--supersample", type=int, default=2)
    p.add_argument("--quality", choices=("low", "high"), default="high")
    p.add_argument("--biome", choices=("urban", "water", "pasture"),
                   default="pasture")
    p.add_argument("--seed", type=int, default=0)


def _cmd_serve(args) -> int:
    cfg = ServerConfig(
        host=args.host, port=args.port, width=args.width, height=args.height,
        supersample=args.supersample, quality=args.quality,
        biome=args.biome, seed=args.seed)
    print(f"listening on {cfg.host}:{cfg.port}", file=sys.stderr)
    run_server(cfg)
    return 0


def _add_align(sub) -> None:
    p = sub.add_parser(
        "align", help="match a source meta.csv to a target distribution")
    p.add_argument("--source", required=True, help="source meta.csv")
    p.add_argument("--target", required=True, help="target meta.csv")
    p.add_argument("--mode", choices=("time", "altitude", "pitch"),
                   default="time")
    p.add_argument("--n", type=int,
                   help="sample size (default: source row count)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-deg", type=float,
                   help="pitch mode: target angle "
                        "(default: median target pitch)")
    p.add_argument("--threshold-deg", type=float, default=20.0,
                   help="pitch mode: keep frames within this of the target")
    p.add_argument("--out", help="write selected frame_ids here "
                                 "(default: stdout)")


def _cmd_align(args) -> int:
    source = meta_align.MetaTable.from_csv(args.source)
    target = meta_align.MetaTable.from_csv(args.target)
    n = args.n if args.n is not None else len(source)
    if args.mode == "time":
        rows = meta_align.time_align(source, target, n, args.seed)
    elif args.mode == "altitude":
        rows = meta_align.altitude_align(source, target, n, args.seed)
    else:
        target_deg = (args.target_deg if args.target_deg is not None
                      else float(np.median(target.pitch)))
        rows = meta_align.angle_filter(source.pitch, target_deg,
                                       args.threshold_deg)
    ids = source.frame_id[rows]
    text = "".join(f"{int(i)}\n" for i in ids)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(ids)} frame ids to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def _add_eval(sub) -> None:
    p = sub.add_parser(
        "eval", help="score detections against dataset labels (mAP@0.5)")
    p.add_argument("--dataset", required=True, help="dataset root directory")
    p.add_argument("--detections", required=True,
                   help="JSON detections file")
    p.add_argument("--split", help="restrict to one manifest split")


def _cmd_eval(args) -> int:
    frame_ids = None
    if args.split:
        manifest = dataset_io.read_manifest(args.dataset)
        if args.split not in manifest["splits"]:
            raise AerogenError(
                f"unknown split {args.split!r}; "
                f"available: {sorted(manifest['splits'])}")
        frame_ids = manifest["splits"][args.split]
    truths = evalmap.load_ground_truth(args.dataset, frame_ids)
    dets = evalmap.load_detections(args.detections)
    if frame_ids is not None:
        keep = set(frame_ids)
        dets = [d for d in dets if d.frame_id in keep]
    result = evalmap.evaluate(dets, truths)
    names = dataset_io.CLASS_NAMES_SORTED
    for ci in sorted(result.per_class):
        name = names[ci] if 0 <= ci < len(names) else str(ci)
        print(f"AP@0.5 {name:>16}: {result.per_class[ci]:.4f} "
              f"({result.gt_counts[ci]} gt)")
    print(f"mAP@0.5: {result.map50:.4f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aerogen",
        description="synthetic aerial imagery: generate, serve, align, eval")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_serve(sub)
    _add_align(sub)
    _add_eval(sub)
    args = parser.parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "serve": _cmd_serve,
        "align": _cmd_align,
        "eval": _cmd_eval,
    }[args.command]
    try:
        return handler(args)
    except AerogenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
