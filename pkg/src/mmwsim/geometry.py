"""Scene geometry: triangle meshes, poses, spherical projection.

Coordinate convention (right-handed):
    x = cross-range, y = range (boresight), z = up.
Azimuth is measured in the x-y plane from the +y axis toward +x;
elevation is measured from the x-y plane toward +z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import EmptyMeshError, MeshParseError, SceneError

_TWO_PI = 2.0 * math.pi


def _as_points(a):
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"expected (n, 3) array, got {out.shape}")
    return out


def triangle_normals(vertices, triangles):
    """Unit normals per triangle, right-hand rule on vertex winding."""
    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    n = np.cross(e1, e2)
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    norm[norm == 0.0] = 1.0
    return n / norm


def triangle_areas(vertices, triangles):
    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


@dataclass
class TriangleMesh:
    """Indexed triangle mesh with per-triangle unit normals."""

    vertices: np.ndarray  # (n, 3) float64, meters
    triangles: np.ndarray  # (m, 3) int32 vertex indices
    normals: np.ndarray = field(default=None)  # (m, 3) unit vectors

    def __post_init__(self):
        self.vertices = _as_points(self.vertices)
        self.triangles = np.asarray(self.triangles, dtype=np.int32)
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be (m, 3)")
        if len(self.vertices) == 0 or len(self.triangles) == 0:
            raise EmptyMeshError("mesh has no geometry")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise ValueError("triangle index out of range")
        if not np.isfinite(self.vertices).all():
            raise ValueError("non-finite vertex")
        if self.normals is None:
            self.normals = triangle_normals(self.vertices, self.triangles)
        else:
            self.normals = _as_points(self.normals)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def areas(self):
        return triangle_areas(self.vertices, self.triangles)

    def bounds(self):
        """Axis-aligned (min, max) corners."""
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def transformed(self, pose: "Pose") -> "TriangleMesh":
        verts = pose.apply(self.vertices)
        return TriangleMesh(verts, self.triangles.copy())


def normalize_yaw(yaw):
    return float(yaw) % _TWO_PI


@dataclass
class Pose:
    """Rigid placement on the road: translation plus yaw about +z."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0  # radians, normalized to [0, 2*pi)

    def __post_init__(self):
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        self.yaw = normalize_yaw(self.yaw)

    def rotation(self):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def apply(self, points):
        return _as_points(points) @ self.rotation().T + self.translation

    def is_identity(self):
        return self.yaw == 0.0 and not self.translation.any()


@dataclass
class SceneObject:
    mesh: TriangleMesh
    pose: Pose
    vehicle_id: str


@dataclass
class Scene:
    """Radar origin, ground plane, and posed vehicle meshes."""

    radar_origin: np.ndarray
    ground_height: float
    objects: list

    def __post_init__(self):
        self.radar_origin = np.asarray(self.radar_origin, dtype=np.float64).reshape(3)
        self.ground_height = float(self.ground_height)


def pose_scene(scene: Scene, strict: bool = True) -> Scene:
    """Bake every pose into world-frame vertices; resulting poses are identity.

    With strict=True the scene invariants are enforced: geometry above the
    ground plane and radar origin outside every mesh bounding box.
    """
    posed = []
    for obj in scene.objects:
        mesh = obj.mesh if obj.pose.is_identity() else obj.mesh.transformed(obj.pose)
        if strict:
            lo, hi = mesh.bounds()
            if lo[2] < scene.ground_height - 1e-9:
                raise SceneError(
                    f"vehicle {obj.vehicle_id!r} dips below ground "
                    f"({lo[2]:.3f} < {scene.ground_height:.3f})"
                )
            if np.all(scene.radar_origin >= lo) and np.all(scene.radar_origin <= hi):
                raise SceneError(f"radar origin inside bounds of {obj.vehicle_id!r}")
        posed.append(SceneObject(mesh, Pose(), obj.vehicle_id))
    return Scene(scene.radar_origin.copy(), scene.ground_height, posed)


def load_scene(path, mesh_dir=None) -> Scene:
    """Read a scene description JSON (see README for the schema)."""
    path = Path(path)
    doc = json.loads(path.read_text())
    base = Path(mesh_dir) if mesh_dir is not None else path.parent
    objects = []
    for entry in doc.get("vehicles", []):
        mesh_path = Path(entry["mesh"])
        if not mesh_path.is_absolute():
            mesh_path = base / mesh_path
        mesh = load_mesh(mesh_path)
        pose = Pose(
            translation=[entry.get("x", 0.0), entry.get("y", 0.0), entry.get("z", 0.0)],
            yaw=math.radians(entry.get("yaw_deg", 0.0)),
        )
        objects.append(SceneObject(mesh, pose, str(entry.get("id", len(objects)))))
    return Scene(
        radar_origin=doc.get("radar_origin", [0.0, 0.0, 0.0]),
        ground_height=doc.get("ground_height", 0.0),
        objects=objects,
    )


# ---------------------------------------------------------------------------
# OBJ ingestion


def load_mesh(path) -> TriangleMesh:
    """Load a Wavefront OBJ triangle mesh; quads are fan-triangulated.

    Normals present in the file are ignored and recomputed from windings.
    """
    path = Path(path)
    vertices = []
    faces = []
    with open(path, "r") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshParseError(path, line_no, "vertex needs 3 coordinates")
                try:
                    vertices.append([float(p) for p in parts[1:4]])
                except ValueError as exc:
                    raise MeshParseError(path, line_no, f"bad vertex: {exc}") from exc
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshParseError(path, line_no, "face needs >= 3 vertices")
                idx = []
                for p in parts[1:]:
                    tok = p.split("/")[0]
                    try:
                        i = int(tok)
                    except ValueError as exc:
                        raise MeshParseError(path, line_no, f"bad face index {p!r}") from exc
                    if i < 0:
                        i = len(vertices) + i
                    else:
                        i = i - 1
                    if i < 0 or i >= len(vertices):
                        raise MeshParseError(path, line_no, f"face index {p!r} out of range")
                    idx.append(i)
                for k in range(1, len(idx) - 1):  # fan triangulation
                    faces.append([idx[0], idx[k], idx[k + 1]])
            # other tags (vn, vt, o, g, s, mtllib, usemtl) are ignored
    if not vertices or not faces:
        raise EmptyMeshError(f"{path}: no triangles found")
    return TriangleMesh(np.array(vertices), np.array(faces, dtype=np.int32))


def save_obj(mesh: TriangleMesh, path):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


# ---------------------------------------------------------------------------
# Angular grids and spherical projection


@dataclass
class AngularGrid:
    """Uniform azimuth/elevation grid; angles in radians, pixel-center sampled."""

    az_min: float
    az_max: float
    el_min: float
    el_max: float
    n_az: int
    n_el: int

    def __post_init__(self):
        if self.n_az < 1 or self.n_el < 1:
            raise ValueError("grid resolution must be positive")
        if not (self.az_max > self.az_min and self.el_max > self.el_min):
            raise ValueError("grid extents must be positive")

    @classmethod
    def default(cls, n_az=64, n_el=32):
        return cls(
            az_min=math.radians(-45.0),
            az_max=math.radians(45.0),
            el_min=math.radians(-22.5),
            el_max=math.radians(22.5),
            n_az=n_az,
            n_el=n_el,
        )

    def scaled(self, factor: int) -> "AngularGrid":
        return replace(self, n_az=self.n_az * factor, n_el=self.n_el * factor)

    def az_centers(self):
        step = (self.az_max - self.az_min) / self.n_az
        return self.az_min + (np.arange(self.n_az) + 0.5) * step

    def el_centers(self):
        step = (self.el_max - self.el_min) / self.n_el
        return self.el_min + (np.arange(self.n_el) + 0.5) * step

    def directions(self):
        """Unit ray directions, shape (n_az, n_el, 3)."""
        az = self.az_centers()[:, None]
        el = self.el_centers()[None, :]
        cos_el = np.cos(el)
        d = np.empty((self.n_az, self.n_el, 3))
        d[..., 0] = np.sin(az) * cos_el
        d[..., 1] = np.cos(az) * cos_el
        d[..., 2] = np.broadcast_to(np.sin(el), d[..., 2].shape)
        return d


def direction(az, el):
    """Unit vector for one (azimuth, elevation) pair in radians."""
    return np.array(
        [math.sin(az) * math.cos(el), math.cos(az) * math.cos(el), math.sin(el)]
    )


@dataclass
class MergedScene:
    """All vehicle triangles flattened into one indexed soup."""

    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray
    tri_object: np.ndarray  # index into scene.objects per triangle
    vehicle_ids: list


def merge_scene(scene: Scene) -> MergedScene:
    """Flatten posed vehicle meshes; the scene must already be world frame."""
    verts, tris, tri_obj = [], [], []
    offset = 0
    for i, obj in enumerate(scene.objects):
        if not obj.pose.is_identity():
            raise SceneError("merge_scene expects a posed (world-frame) scene")
        verts.append(obj.mesh.vertices)
        tris.append(obj.mesh.triangles + offset)
        tri_obj.append(np.full(obj.mesh.n_triangles, i, dtype=np.int32))
        offset += len(obj.mesh.vertices)
    if not verts:
        empty3 = np.zeros((0, 3))
        return MergedScene(empty3, np.zeros((0, 3), np.int32), empty3,
                           np.zeros(0, np.int32), [])
    vertices = np.vstack(verts)
    triangles = np.vstack(tris)
    return MergedScene(
        vertices,
        triangles,
        triangle_normals(vertices, triangles),
        np.concatenate(tri_obj),
        [o.vehicle_id for o in scene.objects],
    )


_RAY_EPS = 1e-12
_RAY_CHUNK = 8192


def ray_cast(origin, directions, vertices, triangles):
    """Nearest-hit Moller-Trumbore over a triangle soup.

    directions: (r, 3). Returns (t, tri_index) with t = +inf and index = -1
    for misses. Deterministic: equal-distance ties resolve to the lowest
    triangle index (argmin picks the first minimum).
    """
    origin = np.asarray(origin, dtype=np.float64).reshape(3)
    dirs = _as_points(directions)
    n_rays = len(dirs)
    t_out = np.full(n_rays, np.inf)
    idx_out = np.full(n_rays, -1, dtype=np.int64)
    if len(triangles) == 0 or n_rays == 0:
        return t_out, idx_out

    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    tvec = origin - v0  # (m, 3), shared by all rays

    for start in range(0, n_rays, _RAY_CHUNK):
        d = dirs[start : start + _RAY_CHUNK]  # (r, 3)
        pvec = np.cross(d[:, None, :], e2[None, :, :])  # (r, m, 3)
        det = np.einsum("mk,rmk->rm", e1, pvec)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_det = np.where(np.abs(det) > _RAY_EPS, 1.0 / det, 0.0)
            u = np.einsum("mk,rmk->rm", tvec, pvec) * inv_det
            qvec = np.cross(tvec[None, :, :], e1[None, :, :])  # (1, m, 3)
            v = np.einsum("rk,rmk->rm", d, np.broadcast_to(qvec, pvec.shape)) * inv_det
            t = np.einsum("mk,rmk->rm", e2, np.broadcast_to(qvec, pvec.shape)) * inv_det
        hit = (
            (np.abs(det) > _RAY_EPS)
            & (u >= -1e-12)
            & (v >= -1e-12)
            & (u + v <= 1.0 + 1e-12)
            & (t > 1e-9)
        )
        t = np.where(hit, t, np.inf)
        best = np.argmin(t, axis=1)
        rows = np.arange(len(d))
        t_best = t[rows, best]
        found = np.isfinite(t_best)
        t_out[start : start + len(d)][found] = t_best[found]
        idx_out[start : start + len(d)][found] = best[found]
    return t_out, idx_out


@dataclass
class ProjectionResult:
    """Per-pixel spherical projection output, arrays shaped (n_az, n_el)."""

    depth: np.ndarray  # meters; invalid pixels = 0.0
    triangle_id: np.ndarray  # int, -1 where invalid
    vehicle_index: np.ndarray  # int index into scene objects, -1 where invalid
    grid: AngularGrid

    @property
    def valid(self):
        return self.triangle_id >= 0


def spherical_project(scene: Scene, grid: AngularGrid) -> ProjectionResult:
    """Cast one ray per (azimuth, elevation) pixel from the radar origin.

    Only vehicle meshes participate; the ground plane never occludes.
    """
    merged = merge_scene(scene)
    dirs = grid.directions().reshape(-1, 3)
    t, idx = ray_cast(scene.radar_origin, dirs, merged.vertices, merged.triangles)
    shape = (grid.n_az, grid.n_el)
    depth = np.where(np.isfinite(t), t, 0.0).reshape(shape)
    tri = idx.reshape(shape).astype(np.int64)
    if merged.tri_object.size:
        veh = np.where(idx >= 0, merged.tri_object[np.clip(idx, 0, None)], -1)
    else:
        veh = np.full(idx.shape, -1, dtype=np.int64)
    veh = veh.reshape(shape)
    return ProjectionResult(depth, tri, veh, grid)
