"""Batch sample generation, manifests, and k-fold splitting.

Directory layout: out/{id}.hwke, out/{id}.hwkd, out/{id}.ann.json and
out/manifest.json written last (a crashed run resumes by skipping sample
ids whose three files already exist).
"""

from __future__ import annotations

import copy
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import groundtruth as gt_mod
from . import imager as imager_mod
from .config import SimConfig, canonical_json, config_hash
from .errors import ConfigError, MeshParseError, MmwsimError
from .geometry import Pose, Scene, SceneObject, load_mesh


@dataclass
class VariationConfig:
    """Pose sampling ranges for generated scenes."""

    range_min_m: float = 5.0
    range_max_m: float = 10.0
    azimuth_span_deg: float = 60.0  # car bearing drawn from +/- span/2
    yaw_min_deg: float = 0.0
    yaw_max_deg: float = 360.0
    radar_height_m: float = 1.0

    _FIELDS = {
        "range_min_m",
        "range_max_m",
        "azimuth_span_deg",
        "yaw_min_deg",
        "yaw_max_deg",
        "radar_height_m",
    }

    @classmethod
    def from_dict(cls, doc: dict) -> "VariationConfig":
        unknown = set(doc) - cls._FIELDS
        if unknown:
            raise ConfigError(f"unknown variation config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in sorted(self._FIELDS)}


@dataclass
class SampleRecord:
    sample_id: str
    heat_map: str  # paths relative to the dataset directory
    depth_map: str
    annotations: str
    seed: int
    config_hash: str

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Manifest:
    samples: list
    config: dict
    config_hash: str
    folds: list = None  # fold index per sample, parallel to samples
    k: int = None
    skipped: list = field(default_factory=list)

    def to_dict(self):
        doc = {
            "config": self.config,
            "config_hash": self.config_hash,
            "samples": [s.to_dict() for s in self.samples],
            "skipped": self.skipped,
        }
        if self.folds is not None:
            doc["folds"] = {"k": self.k, "assignment": self.folds}
        return doc

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(canonical_json(self.to_dict()))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Manifest":
        with open(path) as fh:
            doc = json.load(fh)
        samples = [SampleRecord(**s) for s in doc["samples"]]
        folds = doc.get("folds")
        return cls(
            samples=samples,
            config=doc["config"],
            config_hash=doc["config_hash"],
            folds=folds["assignment"] if folds else None,
            k=folds["k"] if folds else None,
            skipped=doc.get("skipped", []),
        )


def _sample_seed(seed, index):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint32)[0])


def _sample_scene(mesh_path, rng, variation: VariationConfig) -> Scene:
    mesh = load_mesh(mesh_path)
    r = rng.uniform(variation.range_min_m, variation.range_max_m)
    bearing = math.radians(
        rng.uniform(-variation.azimuth_span_deg / 2.0, variation.azimuth_span_deg / 2.0)
    )
    yaw = math.radians(rng.uniform(variation.yaw_min_deg, variation.yaw_max_deg))
    pose = Pose(
        translation=[r * math.sin(bearing), r * math.cos(bearing), 0.0], yaw=yaw
    )
    return Scene(
        radar_origin=[0.0, 0.0, variation.radar_height_m],
        ground_height=0.0,
        objects=[SceneObject(mesh, pose, Path(mesh_path).stem)],
    )


def _mesh_order(mesh_paths, count, seed):
    """Round-robin through the library in a seed-shuffled order."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xD5,)))
    order = []
    while len(order) < count:
        idx = rng.permutation(len(mesh_paths))
        order.extend(idx.tolist())
    return order[:count]


def generate_dataset(
    mesh_paths,
    count: int,
    out_dir,
    sim: SimConfig,
    variation: VariationConfig = None,
    seed: int = 0,
    threads: int = None,
    k: int = None,
    log=None,
) -> Manifest:
    """Simulate `count` samples into out_dir and write the manifest.

    Each sample owns a seed derived from (seed, index); generation is
    byte-deterministic and parallel-safe across samples.
    """
    mesh_paths = [str(p) for p in mesh_paths]
    if not mesh_paths:
        raise ConfigError("mesh library is empty")
    if count < 1:
        raise ConfigError("count must be >= 1")
    variation = variation or VariationConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    full_config = {
        "simulation": sim.to_dict(),
        "variation": variation.to_dict(),
        "seed": seed,
        "count": count,
        "meshes": sorted(Path(p).name for p in mesh_paths),
    }
    c_hash = config_hash(full_config)
    order = _mesh_order(mesh_paths, count, seed)

    skipped = []
    records: list = [None] * count

    def build(i):
        sample_id = f"{i:06d}"
        files = {
            "heat_map": f"{sample_id}.hwke",
            "depth_map": f"{sample_id}.hwkd",
            "annotations": f"{sample_id}.ann.json",
        }
        s_seed = _sample_seed(seed, i)
        record = SampleRecord(sample_id, files["heat_map"], files["depth_map"],
                              files["annotations"], s_seed, c_hash)
        if all((out_dir / f).exists() for f in files.values()):
            return record  # resume: already generated
        try:
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                               spawn_key=(i,)))
            scene = _sample_scene(mesh_paths[order[i]], rng, variation)
            sample_sim = copy.deepcopy(sim)
            sample_sim.rcs.seed = s_seed
            sample_sim.channel.seed = s_seed
            heat, depth, ann = imager_mod.simulate_sample(scene, sample_sim)
        except (MeshParseError, MmwsimError) as exc:
            if log:
                log(f"sample {sample_id} skipped: {exc}")
            skipped.append({"sample_id": sample_id, "reason": str(exc)})
            return None
        imager_mod.save_heat_map(heat, out_dir / files["heat_map"])
        gt_mod.save_depth_map(depth, out_dir / files["depth_map"])
        ann.save(out_dir / files["annotations"])
        return record

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(build, range(count)))
    else:
        results = [build(i) for i in range(count)]
    records = [r for r in results if r is not None]
    skipped.sort(key=lambda s: s["sample_id"])

    manifest = Manifest(records, full_config, c_hash, skipped=skipped)
    if k is not None:
        manifest = split_kfold(manifest, k, seed)
    manifest.save(out_dir / "manifest.json")
    return manifest


def split_kfold(manifest: Manifest, k: int, seed: int = 0) -> Manifest:
    """Assign every sample to exactly one of k folds, deterministically."""
    n = len(manifest.samples)
    if not (2 <= k <= n):
        raise ConfigError(f"k must be in [2, {n}]")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xF0,)))
    perm = rng.permutation(n)
    folds = [0] * n
    for pos, sample_idx in enumerate(perm):
        folds[sample_idx] = pos % k
    manifest.folds = folds
    manifest.k = k
    return manifest
