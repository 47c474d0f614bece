"""Command-line interface.

Every subcommand prints one JSON object on stdout; diagnostics go to stderr.
Options can also come from a JSON file given with ``--config`` (keys are the
long option names with dashes replaced by underscores); explicit flags win.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import os
from pathlib import Path
import sys
import time

import numpy as np

from . import io as fio
from .candidates import CandidateSet, CandidateSpec, Kind, angular_steps, candidate_for_rig, make_candidates
from .cost_volume import extract_descriptors, regularize_box, variance_volume
from .errors import ConfigurationError, DomainError
from .estimator import DEFAULT_TEMPERATURE
from .evalbench import evaluate
from .pipeline import DEFAULT_H, DEFAULT_RADIUS, check_inputs, estimate
from .rig import max_baseline
from .scenes import D_MAX, D_MIN, LAYOUTS, demo_scenes, robot_body
from .sweep import build_warp_table, sweep_views
from .synth import load_scene, render_equirect_gt, render_fisheye, scene_to_dict, with_occluder

log = logging.getLogger("gicand")


# --- helpers ----------------------------------------------------------------

def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _out_dir(args) -> Path:
    p = Path(args.out_dir or ".")
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_rig(args):
    if not args.rig:
        raise ConfigurationError("--rig is required")
    if args.rig in LAYOUTS:
        return LAYOUTS[args.rig]()
    return fio.load_rig(args.rig)


def _candidate_spec(args, rig=None) -> CandidateSet:
    """Candidate set from --candidates FILE, --candidates-from-rig or the candidate flags."""
    if getattr(args, "candidates", None):
        path = Path(args.candidates)
        if not path.is_file():
            raise ConfigurationError(f"candidate file not found: {path}")
        return CandidateSet.from_dict(json.loads(path.read_text()))
    kind = Kind(args.kind)
    if getattr(args, "candidates_from_rig", False) or (kind is Kind.GI and args.baseline is None):
        if rig is None:
            raise ConfigurationError("GI candidates need --baseline or a rig")
        return candidate_for_rig(rig, args.d_min, args.d_max, args.n, kind)
    return make_candidates(CandidateSpec(args.d_min, args.d_max, args.n, kind, args.baseline))


def _read_images(args, rig):
    """Inputs in file mode (--images/--masks) or synthetic mode (--scene, rendered in memory)."""
    scene_path = getattr(args, "scene", None)
    if scene_path and args.images:
        raise ConfigurationError("give either --scene or --images, not both")
    if scene_path:
        scene = load_scene(scene_path)
        out = [render_fisheye(scene, c.intrinsics, c.extrinsics, args.supersample) for c in rig.cameras]
        rig = rig.with_masks([o[2] for o in out])
        return [o[0] for o in out], rig
    if not args.images:
        raise ConfigurationError("--images (file mode) or --scene (synthetic mode) is required")
    images = [fio.read_png(p) for p in args.images]
    if args.masks:
        if len(args.masks) != len(rig.cameras):
            raise ConfigurationError(f"{len(args.masks)} masks for {len(rig.cameras)} cameras")
        rig = rig.with_masks([fio.read_mask(p) for p in args.masks])
    check_inputs(images, rig)
    return images, rig


# --- commands ---------------------------------------------------------------

def cmd_init_demo(args):
    out = _out_dir(args)
    written = []
    for name, make in LAYOUTS.items():
        p = out / "rigs" / f"{name}.json"
        fio.save_rig(p, make())
        written.append(str(p))
    for sc in demo_scenes():
        for s in (sc, with_occluder(sc, robot_body())):
            p = out / "scenes" / f"{s.name}.json"
            fio.write_json(p, scene_to_dict(s))
            written.append(str(p))
    return {"written": written}


def cmd_render_scene(args):
    if not args.scene:
        raise ConfigurationError("--scene is required")
    scene = load_scene(args.scene)
    rig = _load_rig(args)
    out = _out_dir(args)
    H = args.height
    files = {"images": [], "masks": []}
    for cam in rig.cameras:
        rgb, _, mask = render_fisheye(scene, cam.intrinsics, cam.extrinsics, args.supersample)
        ip, mp = out / f"{cam.name}.png", out / f"{cam.name}_mask.png"
        fio.write_png(ip, rgb)
        fio.write_mask(mp, mask)
        files["images"].append(str(ip))
        files["masks"].append(str(mp))
    gt = render_equirect_gt(scene, rig, H, 2 * H)
    gp = out / "gt_distance.pfm"
    fio.write_pfm(gp, gt.distance)
    files["gt"] = str(gp)
    files["rig"] = rig.digest()
    files["scene"] = scene.name
    return files


def cmd_gen_candidates(args):
    rig = _load_rig(args) if args.rig else None
    cset = _candidate_spec(args, rig)
    res = cset.to_dict()
    b = args.baseline or cset.spec.baseline or (max_baseline(rig) if rig else None)
    if b:
        steps = angular_steps(cset, b)
        res["angular_steps"] = steps.tolist()
        res["step_ratio"] = float(steps.max() / steps.min())
    if args.out_dir:
        out = _out_dir(args)
        fio.write_json(out / "candidates.json", cset.to_dict())
        buf = _io.StringIO()
        w = csv.writer(buf)
        w.writerow(["index", "distance_m", "inverse_distance", "angle_step_rad"])
        steps = res.get("angular_steps", [])
        for k, d in enumerate(cset.distances):
            w.writerow([k, repr(float(d)), repr(1.0 / float(d)), repr(steps[k]) if k < len(steps) else ""])
        fio._atomic_write(out / "candidates.csv", buf.getvalue().encode())
        if args.plot:
            from .figures import candidate_steps_figure
            res["figure"] = str(candidate_steps_figure(
                out / "candidate_steps.png", d_min=cset.spec.d_min, d_max=cset.spec.d_max,
                n=cset.spec.n))
    return res


def cmd_estimate(args):
    rig = _load_rig(args)
    images, rig = _read_images(args, rig)
    cset = _candidate_spec(args, rig)
    out = _out_dir(args)
    H = args.height
    t0 = time.perf_counter()
    est = estimate(images, rig, cset, H, args.temperature, args.radius)
    elapsed = time.perf_counter() - t0
    fio.write_pfm(out / "distance.pfm", est.panorama.distance)
    fio.write_pfm(out / "confidence.pfm", est.panorama.confidence)
    fio.write_mask(out / "covered.png", est.covered)
    fio.write_json(out / "candidates.json", cset.to_dict())
    prob = est.prob.prob
    summary = {
        "mean_probability": prob.mean(axis=(1, 2)).tolist(),
        "argmax_histogram": np.bincount(prob.argmax(axis=0).ravel(), minlength=len(cset)).tolist(),
        "mean_confidence": float(est.panorama.confidence.mean()),
        "covered_fraction": float(est.covered.mean()),
    }
    fio.write_json(out / "probability_summary.json", summary)
    res = {"distance": str(out / "distance.pfm"), "confidence": str(out / "confidence.pfm"),
           "candidates": cset.to_dict(), "seconds": elapsed, "rig": rig.digest(),
           "summary": summary}
    if args.plot:
        from .figures import distance_figure
        res["figure"] = str(distance_figure(out / "distance.png", est.panorama.distance,
                                                     mask=est.covered))
    return res


def cmd_eval(args):
    pred = fio.read_pfm(args.pred)
    gt = fio.read_pfm(args.gt)
    mask = fio.read_mask(args.mask) if args.mask else None
    config = {"pred": str(args.pred), "gt": str(args.gt)}
    if args.candidates:
        config["candidates"] = json.loads(Path(args.candidates).read_text())["spec"]
    rep = evaluate(pred, gt, mask, config)
    if args.out_dir:
        out = _out_dir(args)
        fio.write_json(out / "report.json", rep.to_dict())
        if args.plot:
            from .figures import distance_figure
            distance_figure(out / "eval.png", pred, gt, mask)
    return rep.to_dict()


def cmd_inspect_volume(args):
    rig = _load_rig(args)
    images, rig = _read_images(args, rig)
    cset = _candidate_spec(args, rig)
    k = args.candidate
    if not 0 <= k < len(cset):
        raise ConfigurationError(f"candidate index {k} outside 0..{len(cset) - 1}")
    out = _out_dir(args)
    H = args.height
    table = build_warp_table(rig, cset, H, 2 * H)
    vol = variance_volume(sweep_views([extract_descriptors(i) for i in images], table))
    reg = regularize_box(vol, args.radius)
    files = {}
    for name, arr in [("cost", vol.cost[k]), ("cost_regularized", reg.cost[k]),
                      ("valid_count", vol.count[k].astype(np.float32))]:
        p = out / f"{name}_{k:02d}.pfm"
        fio.write_pfm(p, arr)
        files[name] = str(p)
    for c, cam in enumerate(rig.cameras):
        for comp, arr in (("u", table.u[c, k]), ("v", table.v[c, k])):
            p = out / f"warp_{comp}_{cam.name}_{k:02d}.pfm"
            fio.write_pfm(p, np.where(table.valid[c, k], arr, -1.0))
            files[f"warp_{comp}_{cam.name}"] = str(p)
    return {"candidate": k, "distance": float(cset.distances[k]), "files": files}


def cmd_layout_experiment(args):
    from .experiments import run_layout_experiment
    from .figures import layout_figure

    rig_train = LAYOUTS[args.train]() if args.train in LAYOUTS else fio.load_rig(args.train)
    rig_test = LAYOUTS[args.test]() if args.test in LAYOUTS else fio.load_rig(args.test)
    scenes = [load_scene(p) for p in args.scenes] if args.scenes else demo_scenes()
    if args.occluder:
        scenes = [with_occluder(s, robot_body()) for s in scenes]
    results = run_layout_experiment(scenes, rig_train, rig_test, args.n, Kind(args.kind),
                                    args.height, args.d_min, args.d_max, args.temperature,
                                    args.radius, args.threads)
    out = _out_dir(args)
    buf = _io.StringIO()
    w = csv.writer(buf)
    w.writerow(["scene", "candidates", "mae", "rmse", "ssim", "pixels"])
    for r in results:
        for label, rep in (("train", r.stale), ("adjusted", r.adjusted)):
            w.writerow([r.scene, label, f"{rep.mae:.6f}", f"{rep.rmse:.6f}", f"{rep.ssim:.6f}", rep.pixels])
    fio._atomic_write(out / "layout_results.csv", buf.getvalue().encode())
    stale = float(np.mean([r.stale.mae for r in results]))
    adj = float(np.mean([r.adjusted.mae for r in results]))
    summary = {"results": [r.to_dict() for r in results], "mean_mae_train_candidates": stale,
               "mean_mae_adjusted_candidates": adj, "mean_improvement": 1.0 - adj / stale}
    fio.write_json(out / "layout_results.json", summary)
    summary["figure"] = str(layout_figure(out / "layout_results.png", results,
                                          f"{args.train} -> {args.test}"))
    return summary


# --- parser -----------------------------------------------------------------

def _add_candidate_flags(p):
    p.add_argument("--kind", choices=[k.value for k in Kind], default=None)
    p.add_argument("--n", type=int, default=None, help="candidate count")
    p.add_argument("--d-min", type=float, default=None)
    p.add_argument("--d-max", type=float, default=None)
    p.add_argument("--baseline", type=float, default=None, help="GI baseline override (m)")
    p.add_argument("--candidates-from-rig", action="store_true",
                   help="recompute GI candidates from the loaded rig's baseline")
    p.add_argument("--candidates", default=None, help="candidate JSON file to reuse")


def _add_estimation_flags(p):
    p.add_argument("--rig", default=None, help="rig JSON or built-in layout name")
    p.add_argument("--images", nargs="+", default=None)
    p.add_argument("--masks", nargs="+", default=None)
    p.add_argument("--scene", default=None, help="render inputs from a scene JSON instead of reading images")
    p.add_argument("--supersample", type=int, default=None)
    p.add_argument("--height", type=int, default=None, help="panorama rows (width = 2x)")
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--radius", type=int, default=None)
    _add_candidate_flags(p)


DEFAULTS = {
    "kind": "GI", "n": 16, "d_min": D_MIN, "d_max": D_MAX, "height": DEFAULT_H,
    "temperature": DEFAULT_TEMPERATURE, "radius": DEFAULT_RADIUS, "supersample": 2,
    "train": "train", "test": "wide", "threads": 1,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON file with option values")
    common.add_argument("--out-dir", default=None)
    common.add_argument("--threads", type=int, default=None, help="worker threads (0 = all cores)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="gicand", parents=[common], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init-demo", parents=[common], help="write built-in rigs and demo scenes")
    p.set_defaults(func=cmd_init_demo)

    p = sub.add_parser("render-scene", parents=[common], help="render fisheye views + GT panorama")
    p.add_argument("--scene", default=None)
    p.add_argument("--rig", default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--supersample", type=int, default=None)
    p.set_defaults(func=cmd_render_scene)

    p = sub.add_parser("gen-candidates", parents=[common], help="EV / GI candidate sets")
    p.add_argument("--rig", default=None)
    p.add_argument("--plot", action="store_true")
    _add_candidate_flags(p)
    p.set_defaults(func=cmd_gen_candidates)

    p = sub.add_parser("estimate", parents=[common], help="distance panorama from fisheye images")
    _add_estimation_flags(p)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("eval", parents=[common], help="MAE / RMSE / SSIM on inverse distance")
    p.add_argument("--pred", required=False)
    p.add_argument("--gt", required=False)
    p.add_argument("--mask", default=None)
    p.add_argument("--candidates", default=None, help="candidate JSON to echo in the report")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect-volume", parents=[common], help="dump cost / warp slices as PFM")
    _add_estimation_flags(p)
    p.add_argument("--candidate", type=int, default=0)
    p.set_defaults(func=cmd_inspect_volume)

    p = sub.add_parser("layout-experiment", parents=[common],
                       help="stale vs adjusted candidates on a new layout")
    p.add_argument("--train", default=None, help="training layout name or rig JSON")
    p.add_argument("--test", default=None, help="deployed layout name or rig JSON")
    p.add_argument("--scenes", nargs="+", default=None, help="scene JSON files (default: demo suite)")
    p.add_argument("--occluder", action="store_true", help="add the robot-body occluder")
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--radius", type=int, default=None)
    _add_candidate_flags(p)
    p.set_defaults(func=cmd_layout_experiment)
    return parser


def _apply_config(args):
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        cfg = json.loads(path.read_text())
        base = path.parent
        # relative paths in a config file are relative to the file
        for key in ("rig", "scene", "pred", "gt", "mask", "candidates"):
            if isinstance(cfg.get(key), str) and cfg[key] not in LAYOUTS:
                cfg[key] = str(base / cfg[key])
        for key in ("images", "masks", "scenes"):
            if isinstance(cfg.get(key), list):
                cfg[key] = [str(base / p) for p in cfg[key]]
    for key, value in vars(args).items():
        # store_true flags default to False, so a config value may switch them on
        if (value is None or value is False) and key in cfg:
            setattr(args, key, cfg[key])
    for key, value in DEFAULTS.items():
        if getattr(args, key, "missing") is None:
            setattr(args, key, value)
    if args.threads == 0:
        args.threads = os.cpu_count() or 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args)
        if args.command == "eval" and not (args.pred and args.gt):
            raise ConfigurationError("eval needs --pred and --gt")
        _emit(args.func(args))
    except (ConfigurationError, DomainError, FileNotFoundError) as e:
        print(f"gicand {args.command}: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
