"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 input validation, 3 too few
landmarks/anchors, 4 degenerate (collinear) geometry.
"""
import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .camera import load_rig
from .depth import AggregationMethod, disparity_to_depth
from .detections import parse_detections
from .dvhop import ExperimentParams, run_experiment
from .exceptions import (
    CollinearAnchorsError,
    InsufficientAnchorsError,
    MalformedInputError,
    StereoLocError,
)
from .geo import (
    build_nvc,
    eval_metrics,
    load_registry,
    project_enu,
    registry_centroid,
    trilaterate,
    unproject_enu,
)
from .imageio import disparity_visualization, read_pfm, read_pgm, write_pfm, write_pgm
from .matching import MatcherParams, compute_disparity

log = logging.getLogger("stereoloc")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_ANCHORS, EXIT_DEGENERATE = 0, 1, 2, 3, 4

PRESETS = {
    "paper": {"block_size": 5, "min_disp": 0, "max_disp": 64, "paths": 8, "agg": "mean"},
}


class InsufficientLandmarks(Exception):
    pass


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _write_manifest(out, command, inputs, params, started):
    manifest = {
        "command": command,
        "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
        "params": params,
        "toolVersion": __version__,
        "wallTimeS": time.perf_counter() - started,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(str(out) + ".manifest.json", manifest)


def _lr_value(text):
    v = float(text)
    return math.inf if v < 0 else v


def _matcher_args(p):
    g = p.add_argument_group("matcher")
    g.add_argument("--block-size", type=int)
    g.add_argument("--min-disp", type=int)
    g.add_argument("--max-disp", type=int)
    g.add_argument("--p1", type=float)
    g.add_argument("--p2", type=float)
    g.add_argument("--paths", type=int, choices=(4, 8))
    g.add_argument("--lr-max-diff", type=_lr_value, help="pixels; negative or inf disables")
    g.add_argument("--uniqueness", type=float)
    g.add_argument("--no-subpixel", action="store_true")
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--preset", choices=sorted(PRESETS))


def _resolve(args, key, attr=None):
    val = getattr(args, attr or key, None)
    if val is None and getattr(args, "preset", None):
        val = PRESETS[args.preset].get(key)
    return val


def _matcher_params(args):
    kw = {
        "block_size": _resolve(args, "block_size"),
        "min_disp": _resolve(args, "min_disp"),
        "max_disp": _resolve(args, "max_disp"),
        "p1": args.p1,
        "p2": args.p2,
        "num_paths": _resolve(args, "paths"),
        "lr_max_diff": args.lr_max_diff,
        "uniqueness_ratio": args.uniqueness,
    }
    kw = {k: v for k, v in kw.items() if v is not None}
    return MatcherParams(subpixel=not args.no_subpixel, n_jobs=args.jobs, **kw)


def _params_dict(params):
    d = asdict(params)
    if math.isinf(d["lr_max_diff"]):
        d["lr_max_diff"] = None
    return d


def _load_pair(args, rig):
    left = read_pgm(args.left)
    right = read_pgm(args.right)
    if left.shape != right.shape:
        raise StereoLocError(
            f"image size mismatch: {args.left} is {left.shape[1]}x{left.shape[0]}, "
            f"{args.right} is {right.shape[1]}x{right.shape[0]}"
        )
    if left.shape != (rig.image_height, rig.image_width):
        raise StereoLocError(
            f"image size {left.shape[1]}x{left.shape[0]} does not match rig "
            f"{rig.image_width}x{rig.image_height} ({args.rig})"
        )
    return left, right


def cmd_disparity(args):
    started = time.perf_counter()
    rig = load_rig(args.rig)
    left, right = _load_pair(args, rig)
    params = _matcher_params(args)
    disp = compute_disparity(left, right, params)
    write_pfm(args.out, disp)
    if args.vis:
        write_pgm(args.vis, disparity_visualization(disp), maxval=255)
    _write_manifest(
        args.out, "disparity",
        {"left": args.left, "right": args.right, "rig": args.rig},
        _params_dict(params), started,
    )


def cmd_depth(args):
    started = time.perf_counter()
    rig = load_rig(args.rig)
    disp = read_pfm(args.disparity)
    write_pfm(args.out, disparity_to_depth(disp, rig))
    _write_manifest(
        args.out, "depth", {"disparity": args.disparity, "rig": args.rig}, {}, started
    )


def cmd_locate(args):
    started = time.perf_counter()
    rig = load_rig(args.rig)
    left, right = _load_pair(args, rig)
    dets = parse_detections(Path(args.detections).read_bytes())
    registry = load_registry(args.registry)
    params = _matcher_params(args)
    method = AggregationMethod.parse(_resolve(args, "agg") or "mean")

    disp = compute_disparity(left, right, params)
    depth = disparity_to_depth(disp, rig)
    if args.depth_out:
        write_pfm(args.depth_out, depth)
    nvc = build_nvc(
        dets, depth, registry, method,
        min_confidence=args.min_confidence, convention=args.box_convention,
    )
    _write_json(args.out, [v.to_dict() for v in nvc])
    run_params = _params_dict(params)
    run_params.update(
        agg=asdict(method), min_confidence=args.min_confidence,
        box_convention=args.box_convention,
    )
    _write_manifest(
        args.out, "locate",
        {"left": args.left, "right": args.right, "rig": args.rig,
         "detections": args.detections, "registry": args.registry},
        run_params, started,
    )
    if args.require_trilateration and len(nvc) < 3:
        raise InsufficientLandmarks(
            f"only {len(nvc)} landmark distance(s); trilateration needs at least 3"
        )


def _read_nvc(path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise MalformedInputError(f"{path}: NVC file must be a JSON array")
    out = []
    for i, rec in enumerate(data):
        try:
            lid, dist = int(rec["landmarkId"]), float(rec["distanceM"])
        except (KeyError, TypeError, ValueError):
            raise MalformedInputError(f"{path}: entry {i} needs landmarkId and distanceM") from None
        if not (math.isfinite(dist) and dist > 0):
            raise MalformedInputError(f"{path}: entry {i} distanceM must be positive")
        out.append((lid, dist))
    return out


def cmd_trilaterate(args):
    started = time.perf_counter()
    nvc = _read_nvc(args.nvc)
    registry = load_registry(args.registry)
    origin = registry_centroid(registry)
    anchors, dists = [], []
    for lid, dist in nvc:
        rec = registry.get(lid)
        if rec is None:
            log.warning("landmark %d not in registry; skipped", lid)
            continue
        anchors.append(project_enu(origin, (rec.lat, rec.lon)))
        dists.append(dist)
    if len(anchors) < 3:
        raise InsufficientAnchorsError(
            f"only {len(anchors)} landmark(s) resolvable in registry; need at least 3"
        )
    pos, resid = trilaterate(np.array(anchors), np.array(dists))
    lat, lon = unproject_enu(origin, pos)
    _write_json(
        args.out,
        {"xEast": float(pos[0]), "yNorth": float(pos[1]), "lat": lat, "lon": lon,
         "residualM": resid},
    )
    _write_manifest(
        args.out, "trilaterate", {"nvc": args.nvc, "registry": args.registry},
        {"origin": list(origin)}, started,
    )


def _parse_seeds(text):
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds given")
    return seeds


def cmd_dvhop(args):
    started = time.perf_counter()
    params = ExperimentParams(args.nodes, args.anchors, args.range, args.per_anchor_correction)
    report = run_experiment(params, args.seeds)
    _write_json(args.out, report)
    _write_manifest(args.out, "dvhop", {}, {**asdict(params), "seeds": args.seeds}, started)


def _read_pairs(path):
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        data = json.loads(text)
        if isinstance(data, dict):
            return data["observed"], data["actual"]
        return [r["observed"] for r in data], [r["actual"] for r in data]
    rows = list(csv.DictReader(text.splitlines()))
    if not rows or "observed" not in rows[0] or "actual" not in rows[0]:
        raise MalformedInputError(f"{path}: CSV needs 'observed' and 'actual' columns")
    return [float(r["observed"]) for r in rows], [float(r["actual"]) for r in rows]


def cmd_eval(args):
    started = time.perf_counter()
    try:
        observed, actual = _read_pairs(args.pairs)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"{args.pairs}: {exc}") from None
    _write_json(args.out, eval_metrics(observed, actual).to_dict())
    _write_manifest(args.out, "eval", {"pairs": args.pairs}, {}, started)


def build_parser():
    parser = argparse.ArgumentParser(prog="stereoloc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("disparity", help="disparity map from a rectified PGM pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--rig", required=True)
    p.add_argument("--out", required=True, help="output PFM")
    p.add_argument("--vis", help="optional 8-bit PGM visualization")
    _matcher_args(p)
    p.set_defaults(func=cmd_disparity)

    p = sub.add_parser("depth", help="depth map (meters) from a disparity PFM")
    p.add_argument("--disparity", required=True)
    p.add_argument("--rig", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("locate", help="landmark distances (virtual coordinates)")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--rig", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--depth-out")
    p.add_argument("--agg", help="mean, median or trim:F")
    p.add_argument("--min-confidence", type=float, default=0.5)
    p.add_argument("--box-convention", choices=("center", "corner"), default="center")
    p.add_argument("--require-trilateration", action="store_true")
    _matcher_args(p)
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("trilaterate", help="node position from virtual coordinates")
    p.add_argument("--nvc", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trilaterate)

    p = sub.add_parser("dvhop", help="DV-Hop baseline simulation")
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--anchors", type=int, default=10)
    p.add_argument("--range", type=float, default=0.2)
    p.add_argument("--seeds", type=_parse_seeds, default=[0])
    p.add_argument("--per-anchor-correction", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dvhop)

    p = sub.add_parser("eval", help="error statistics for observed vs actual distances")
    p.add_argument("--pairs", required=True, help="CSV (observed,actual) or JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (InsufficientAnchorsError, InsufficientLandmarks) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANCHORS
    except CollinearAnchorsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (StereoLocError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
