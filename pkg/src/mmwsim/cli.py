"""Command-line front door.

Subcommands: simulate | dataset | metrics | render | kfold.
Exit codes: 0 ok, 1 I/O error, 2 config error, 3 data mismatch, 64 usage.
Logging goes to stderr; machine-readable output to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds_mod
from . import groundtruth as gt_mod
from . import imager as imager_mod
from . import perception as pc_mod
from .config import SimConfig
from .dataset import Manifest, VariationConfig
from .errors import (
    ConfigError,
    DimensionMismatchError,
    FileFormatError,
    MeshParseError,
    MmwsimError,
)
from .geometry import load_scene

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_MISMATCH = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _log(msg):
    print(msg, file=sys.stderr)


def _resolve_threads(args):
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("HAWK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HAWK_THREADS is not an integer: {env!r}")
    return None


def _load_config(args) -> SimConfig:
    sim = SimConfig.load(args.config) if args.config else SimConfig.from_dict({})
    if getattr(args, "seed", None) is not None:
        sim.seed = args.seed
        sim.rcs.seed = args.seed
        sim.channel.seed = args.seed
    return sim


def cmd_simulate(args):
    sim = _load_config(args)
    scene = load_scene(args.scene)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    heat, depth, ann = imager_mod.simulate_sample(scene, sim)
    stem = args.name
    imager_mod.save_heat_map(heat, out / f"{stem}.hwke")
    gt_mod.save_depth_map(depth, out / f"{stem}.hwkd")
    ann.save(out / f"{stem}.ann.json")
    _log(
        f"simulate: wrote {stem}.hwke/.hwkd/.ann.json to {out} "
        f"(peak power {float(heat.power.max()):.3g}, "
        f"{int(depth.valid.sum())} valid depth pixels)"
    )
    return EXIT_OK


def cmd_dataset(args):
    sim = _load_config(args)
    variation = VariationConfig()
    mesh_dir = Path(args.meshes)
    meshes = sorted(mesh_dir.glob("*.obj"))
    if not meshes:
        raise ConfigError(f"no .obj meshes in {mesh_dir}")
    manifest = ds_mod.generate_dataset(
        meshes,
        args.count,
        args.out,
        sim,
        variation=variation,
        seed=args.seed if args.seed is not None else sim.seed,
        threads=_resolve_threads(args),
        k=args.k,
        log=_log,
    )
    _log(
        f"dataset: {len(manifest.samples)} samples in {args.out} "
        f"({len(manifest.skipped)} skipped)"
    )
    return EXIT_OK


def cmd_metrics(args):
    candidate = gt_mod.load_depth_map(args.candidate)
    ann = pc_mod.SceneAnnotations.load(args.annotations)
    truth = gt_mod.load_depth_map(args.truth) if args.truth else None
    report = pc_mod.evaluate(candidate, ann, truth=truth)
    print(report.to_json())
    return EXIT_OK


def _render_heat_map(path, out):
    from PIL import Image

    h = imager_mod.load_heat_map(path)
    proj = imager_mod.project_top_m(h, m=1)
    img = proj.powers[0].T[::-1]  # front view, rows top-down
    peak = float(img.max())
    gray = (255.0 * img / peak).astype(np.uint8) if peak > 0 else np.zeros_like(
        img, dtype=np.uint8
    )
    Image.fromarray(gray, mode="L").save(out)


def _render_depth_map(path, out):
    from PIL import Image

    d = gt_mod.load_depth_map(path)
    valid = d.valid
    rgb = np.zeros((*d.values.shape, 3), dtype=np.uint8)
    rgb[..., 2] = 80  # reserved color for the invalid sentinel
    if valid.any():
        lo = float(d.values[valid].min())
        hi = float(d.values[valid].max())
        span = hi - lo if hi > lo else 1.0
        gray = (255.0 * (1.0 - (d.values - lo) / span)).clip(0, 255).astype(np.uint8)
        for c in range(3):
            rgb[..., c][valid] = gray[valid]
    Image.fromarray(rgb, mode="RGB").save(out)


def cmd_render(args):
    path = Path(args.input)
    if path.suffix == ".hwke":
        _render_heat_map(path, args.out)
    elif path.suffix == ".hwkd":
        _render_depth_map(path, args.out)
    else:
        with open(path, "rb") as fh:
            magic = fh.read(4)
        if magic == b"HWKE":
            _render_heat_map(path, args.out)
        elif magic == b"HWKD":
            _render_depth_map(path, args.out)
        else:
            raise FileFormatError(f"{path}: unknown format")
    _log(f"render: wrote {args.out}")
    return EXIT_OK


def cmd_kfold(args):
    manifest = Manifest.load(args.manifest)
    manifest = ds_mod.split_kfold(manifest, args.k, args.seed or 0)
    manifest.save(args.manifest)
    _log(f"kfold: assigned {len(manifest.samples)} samples to {args.k} folds")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmwsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, threads=True):
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="override every config seed")
        if threads:
            p.add_argument("--threads", type=int, default=None,
                           help="worker cap (env HAWK_THREADS as fallback)")

    p = sub.add_parser("simulate", help="simulate one scene into .hwke/.hwkd/.ann.json")
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--scene", required=True, help="scene description JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="sample", help="output file stem")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dataset", help="generate a paired training dataset")
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--meshes", required=True, help="directory of .obj car meshes")
    p.add_argument("--out", required=True, help="dataset directory")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="also assign k folds")
    common(p)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("metrics", help="evaluate a depth-map against annotations")
    p.add_argument("--candidate", required=True, help=".hwkd depth-map to score")
    p.add_argument("--annotations", required=True, help=".ann.json ground truth")
    p.add_argument("--truth", default=None,
                   help="ground-truth .hwkd for surface coverage metrics")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("render", help="render a heat-map or depth-map to PNG")
    p.add_argument("--input", required=True, help=".hwke or .hwkd file")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("kfold", help="assign k folds in an existing manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_kfold)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except DimensionMismatchError as exc:
        _log(f"data mismatch: {exc}")
        return EXIT_MISMATCH
    except (MeshParseError, FileFormatError) as exc:
        _log(f"error: {exc}")
        return EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        _log(f"I/O error: {exc}")
        return EXIT_IO
    except MmwsimError as exc:
        _log(f"error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
