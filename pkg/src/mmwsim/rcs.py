"""Radar cross-section model: visible-surface culling and point reflectors.

Visible triangles are sampled into point reflectors. Each point is
classified by how its surface returns energy to the radar:

  corner   - near a sharp dihedral edge; scatters strongly (boosted amplitude)
  specular - surface tilted away from the back-to-radar direction beyond the
             specularity threshold; its monostatic return is suppressed later
  diffuse  - everything else; normal direct return
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import AngularGrid, MergedScene, Scene, merge_scene, spherical_project

CLASS_DIFFUSE = 0
CLASS_SPECULAR = 1
CLASS_CORNER = 2

CLASS_NAMES = {CLASS_DIFFUSE: "diffuse", CLASS_SPECULAR: "specular", CLASS_CORNER: "corner"}


@dataclass
class RcsConfig:
    density: float = 200.0  # points per square meter of visible surface
    specular_threshold_deg: float = 30.0
    corner_dihedral_deg: float = 120.0
    corner_radius_m: float = 0.05
    corner_gain: float = 4.0
    seed: int = 0

    _FIELDS = {
        "density",
        "specular_threshold_deg",
        "corner_dihedral_deg",
        "corner_radius_m",
        "corner_gain",
        "seed",
    }

    def __post_init__(self):
        if self.density <= 0:
            raise ConfigError("rcs.density must be > 0")
        if self.corner_gain < 0 or self.corner_radius_m < 0:
            raise ConfigError("rcs corner parameters must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "RcsConfig":
        unknown = set(doc) - cls._FIELDS
        if unknown:
            raise ConfigError(f"unknown rcs config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class PointReflectorCloud:
    """Struct-of-arrays cloud of point reflectors."""

    positions: np.ndarray  # (n, 3) meters
    reflectivity: np.ndarray  # (n,) linear amplitude, >= 0
    normals: np.ndarray  # (n, 3) unit surface normals
    classes: np.ndarray  # (n,) uint8 CLASS_* codes
    vehicle_index: np.ndarray  # (n,) int index into scene objects

    def __len__(self):
        return len(self.positions)

    @property
    def direct_visible(self):
        """Mask of points whose monostatic return is not suppressed."""
        return self.classes != CLASS_SPECULAR


def cull_occluded(scene: Scene, grid: AngularGrid = None) -> np.ndarray:
    """Indices (into the merged triangle soup) of triangles that win at
    least one pixel of the spherical projection at culling resolution."""
    if grid is None:
        grid = AngularGrid.default(n_az=512, n_el=256)
    proj = spherical_project(scene, grid)
    hits = proj.triangle_id[proj.triangle_id >= 0]
    return np.unique(hits)


def sharp_edges(merged: MergedScene, max_dihedral_deg: float) -> np.ndarray:
    """Segments (k, 2, 3) of mesh edges whose dihedral angle is at most the
    threshold. Flat junctions (180 deg) are never sharp."""
    edge_map = {}
    for ti, tri in enumerate(merged.triangles):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (a, b) if a < b else (b, a)
            edge_map.setdefault(key, []).append(ti)
    segs = []
    cos_cut = math.cos(math.radians(180.0 - max_dihedral_deg))
    for (a, b), tris in edge_map.items():
        if len(tris) != 2:
            continue
        n1, n2 = merged.normals[tris[0]], merged.normals[tris[1]]
        # dihedral = 180 deg - angle(n1, n2); sharp when dihedral <= cut
        if float(np.dot(n1, n2)) <= cos_cut + 1e-12:
            segs.append([merged.vertices[a], merged.vertices[b]])
    return np.array(segs) if segs else np.zeros((0, 2, 3))


def _point_segment_distance(points, segs):
    """Min distance from each point to any segment. points (n,3), segs (k,2,3)."""
    if len(segs) == 0:
        return np.full(len(points), np.inf)
    a = segs[:, 0]  # (k, 3)
    ab = segs[:, 1] - a
    ab_len2 = np.einsum("kj,kj->k", ab, ab)
    ab_len2[ab_len2 == 0.0] = 1.0
    ap = points[:, None, :] - a[None, :, :]  # (n, k, 3)
    t = np.clip(np.einsum("nkj,kj->nk", ap, ab) / ab_len2, 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    d = np.linalg.norm(points[:, None, :] - closest, axis=2)
    return d.min(axis=1)


def _sample_triangles(merged, tri_idx, density, seed):
    """Stratified area-weighted sampling, one child RNG per triangle so the
    result is independent of iteration order."""
    v0 = merged.vertices[merged.triangles[tri_idx, 0]]
    v1 = merged.vertices[merged.triangles[tri_idx, 1]]
    v2 = merged.vertices[merged.triangles[tri_idx, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
    children = np.random.SeedSequence(seed).spawn(len(tri_idx))
    points, src_tri = [], []
    for i, (ss, area) in enumerate(zip(children, areas)):
        rng = np.random.default_rng(ss)
        expected = density * area
        n = int(expected) + (1 if rng.random() < expected - int(expected) else 0)
        if n == 0:
            continue
        r1 = np.sqrt(rng.random(n))
        r2 = rng.random(n)
        p = (
            (1.0 - r1)[:, None] * v0[i]
            + (r1 * (1.0 - r2))[:, None] * v1[i]
            + (r1 * r2)[:, None] * v2[i]
        )
        points.append(p)
        src_tri.append(np.full(n, tri_idx[i], dtype=np.int64))
    if not points:
        return np.zeros((0, 3)), np.zeros(0, dtype=np.int64)
    return np.vstack(points), np.concatenate(src_tri)


def extract_reflectors(
    scene: Scene, visible: np.ndarray, cfg: RcsConfig
) -> PointReflectorCloud:
    """Sample visible surfaces into classified point reflectors.

    `visible` is the triangle index set from cull_occluded over the same
    posed scene.
    """
    merged = merge_scene(scene)
    points, src_tri = _sample_triangles(merged, np.asarray(visible), cfg.density, cfg.seed)
    n = len(points)
    if n == 0:
        return PointReflectorCloud(
            np.zeros((0, 3)), np.zeros(0), np.zeros((0, 3)),
            np.zeros(0, dtype=np.uint8), np.zeros(0, dtype=np.int32),
        )
    normals = merged.normals[src_tri]
    to_radar = scene.radar_origin[None, :] - points
    to_radar /= np.linalg.norm(to_radar, axis=1, keepdims=True)
    cos_angle = np.clip(np.einsum("nj,nj->n", normals, to_radar), -1.0, 1.0)
    angle = np.degrees(np.arccos(cos_angle))

    classes = np.full(n, CLASS_DIFFUSE, dtype=np.uint8)
    classes[angle > cfg.specular_threshold_deg] = CLASS_SPECULAR
    segs = sharp_edges(merged, cfg.corner_dihedral_deg)
    near_corner = _point_segment_distance(points, segs) <= cfg.corner_radius_m
    classes[near_corner] = CLASS_CORNER  # corner wins over specular

    reflectivity = np.ones(n)
    reflectivity[classes == CLASS_CORNER] *= cfg.corner_gain
    return PointReflectorCloud(
        points,
        reflectivity,
        normals,
        classes,
        merged.tri_object[src_tri].astype(np.int32),
    )


def build_cloud(scene: Scene, cfg: RcsConfig, cull_grid: AngularGrid = None):
    """cull_occluded + extract_reflectors in one call on a posed scene."""
    return extract_reflectors(scene, cull_occluded(scene, cull_grid), cfg)
