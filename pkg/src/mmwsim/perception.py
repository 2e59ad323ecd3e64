"""Perception metrics: point clouds, oriented boxes, surface coverage.

Implements the five scene metrics (range, size, orientation, % surface
missed, % fictitious reflectors) computed from 2D depth-maps.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateCloudError, DimensionMismatchError
from .groundtruth import DepthMap2D

# shape-metric correspondence rule: a pixel matches within this pixel radius
# and depth tolerance
MATCH_RADIUS_PX = 2
MATCH_DEPTH_TOL_M = 0.3


@dataclass
class SceneAnnotations:
    """Ground-truth quantities recorded when a sample is simulated."""

    range_m: float  # closest-corner distance, radar to car, 2D plane
    length_m: float
    width_m: float
    height_m: float
    yaw_deg: float  # [0, 360)
    mask: np.ndarray  # (h, w) bool car pixels at ground-truth resolution

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.yaw_deg = float(self.yaw_deg) % 360.0

    def to_dict(self) -> dict:
        packed = np.packbits(self.mask.astype(np.uint8))
        return {
            "range_m": self.range_m,
            "length_m": self.length_m,
            "width_m": self.width_m,
            "height_m": self.height_m,
            "yaw_deg": self.yaw_deg,
            "mask": {
                "height": int(self.mask.shape[0]),
                "width": int(self.mask.shape[1]),
                "bits": base64.b64encode(packed.tobytes()).decode("ascii"),
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SceneAnnotations":
        m = doc["mask"]
        h, w = int(m["height"]), int(m["width"])
        bits = np.frombuffer(base64.b64decode(m["bits"]), dtype=np.uint8)
        mask = np.unpackbits(bits)[: h * w].reshape(h, w).astype(bool)
        return cls(
            range_m=doc["range_m"],
            length_m=doc["length_m"],
            width_m=doc["width_m"],
            height_m=doc["height_m"],
            yaw_deg=doc["yaw_deg"],
            mask=mask,
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SceneAnnotations":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def to_point_cloud(d: DepthMap2D) -> np.ndarray:
    """Inverse spherical projection: one 3D point per valid pixel."""
    az, el = d.pixel_angles()
    valid = d.valid
    depth = d.values[valid].astype(np.float64)
    az = az[valid]
    el = el[valid]
    cos_el = np.cos(el)
    return np.column_stack(
        (depth * np.sin(az) * cos_el, depth * np.cos(az) * cos_el, depth * np.sin(el))
    )


@dataclass
class OrientedBox:
    """Top-view minimum-area rectangle plus vertical extent."""

    center: np.ndarray  # (2,) x, y
    length_m: float  # longer top-view side
    width_m: float
    height_m: float
    yaw_deg: float  # longer-edge direction from +y (north), [0, 180)

    def corners(self) -> np.ndarray:
        """(4, 2) top-view rectangle corners."""
        yaw = math.radians(self.yaw_deg)
        lon = np.array([math.sin(yaw), math.cos(yaw)])  # unit, from north
        lat = np.array([lon[1], -lon[0]])
        hl, hw = self.length_m / 2.0, self.width_m / 2.0
        return np.array(
            [
                self.center + hl * lon + hw * lat,
                self.center + hl * lon - hw * lat,
                self.center - hl * lon - hw * lat,
                self.center - hl * lon + hw * lat,
            ]
        )


def min_area_rect(points_2d: np.ndarray):
    """Rotating calipers on the convex hull: (center, long, short, yaw_deg)."""
    pts = np.asarray(points_2d, dtype=np.float64)
    if len(pts) < 3:
        raise DegenerateCloudError("need at least 3 points for a box fit")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateCloudError(f"degenerate top view: {exc}") from exc
    hp = pts[hull.vertices]
    edges = np.diff(np.vstack([hp, hp[:1]]), axis=0)
    angles = np.arctan2(edges[:, 1], edges[:, 0])
    best = None
    for ang in angles:
        c, s = math.cos(-ang), math.sin(-ang)
        rot = hp @ np.array([[c, -s], [s, c]]).T
        lo, hi = rot.min(axis=0), rot.max(axis=0)
        ext = hi - lo
        area = ext[0] * ext[1]
        if best is None or area < best[0] - 1e-15:
            center_r = (lo + hi) / 2.0
            c2, s2 = math.cos(ang), math.sin(ang)
            center = center_r @ np.array([[c2, -s2], [s2, c2]]).T
            best = (area, center, ext, ang)
    _, center, ext, ang = best
    # direction of the rectangle side aligned with the hull edge is `ang`
    if ext[0] >= ext[1]:
        long_len, short_len, long_ang = ext[0], ext[1], ang
    else:
        long_len, short_len, long_ang = ext[1], ext[0], ang + math.pi / 2.0
    ux, uy = math.cos(long_ang), math.sin(long_ang)
    yaw_deg = math.degrees(math.atan2(ux, uy)) % 180.0  # from +y (north)
    return center, long_len, short_len, yaw_deg


def estimate_box(cloud: np.ndarray) -> OrientedBox:
    """Fit an oriented box to a 3D point cloud (top-view calipers + z span)."""
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3 or len(cloud) < 3:
        raise DegenerateCloudError("need >= 3 points")
    center, long_len, short_len, yaw_deg = min_area_rect(cloud[:, :2])
    height = float(cloud[:, 2].max() - cloud[:, 2].min())
    return OrientedBox(center, float(long_len), float(short_len), height, yaw_deg)


def _match_offsets(radius_px):
    offs = []
    for dr in range(-radius_px, radius_px + 1):
        for dc in range(-radius_px, radius_px + 1):
            if dr * dr + dc * dc <= radius_px * radius_px:
                offs.append((dr, dc))
    return offs


def _covered(target: np.ndarray, target_valid, source, source_valid, tol, radius_px):
    """Mask over target pixels: does a source pixel within the radius agree in
    depth within the tolerance?"""
    h, w = target.shape
    covered = np.zeros((h, w), dtype=bool)
    for dr, dc in _match_offsets(radius_px):
        r0, r1 = max(0, dr), min(h, h + dr)
        c0, c1 = max(0, dc), min(w, w + dc)
        sub_t = np.s_[r0:r1, c0:c1]
        sub_s = np.s_[r0 - dr : r1 - dr, c0 - dc : c1 - dc]
        ok = (
            target_valid[sub_t]
            & source_valid[sub_s]
            & (np.abs(target[sub_t] - source[sub_s]) <= tol)
        )
        covered[sub_t] |= ok
    return covered


def shape_metrics(
    candidate: DepthMap2D,
    truth: DepthMap2D,
    depth_tol_m: float = MATCH_DEPTH_TOL_M,
    radius_px: int = MATCH_RADIUS_PX,
):
    """(% of truth surface missed, % of candidate pixels that are fictitious)."""
    if not candidate.same_frame(truth):
        raise DimensionMismatchError("candidate and truth dims/extents differ")
    t_valid = truth.valid
    c_valid = candidate.valid
    n_truth = int(t_valid.sum())
    n_cand = int(c_valid.sum())
    if n_truth == 0:
        pct_missed = 0.0
    else:
        covered = _covered(
            truth.values, t_valid, candidate.values, c_valid, depth_tol_m, radius_px
        )
        pct_missed = 100.0 * (n_truth - int(covered.sum())) / n_truth
    if n_cand == 0:
        pct_fictitious = 0.0
    else:
        matched = _covered(
            candidate.values, c_valid, truth.values, t_valid, depth_tol_m, radius_px
        )
        pct_fictitious = 100.0 * (n_cand - int(matched.sum())) / n_cand
    return pct_missed, pct_fictitious


def _polygon_distance(point, corners):
    """Distance from a 2D point to a convex quad boundary (0 if inside)."""
    p = np.asarray(point, dtype=np.float64)
    n = len(corners)
    dmin = math.inf
    crosses = []
    for i in range(n):
        a, b = corners[i], corners[(i + 1) % n]
        ab = b - a
        t = np.clip(np.dot(p - a, ab) / max(np.dot(ab, ab), 1e-30), 0.0, 1.0)
        dmin = min(dmin, float(np.linalg.norm(p - (a + t * ab))))
        ap = p - a
        crosses.append(ab[0] * ap[1] - ab[1] * ap[0])
    inside = all(c >= 0 for c in crosses) or all(c <= 0 for c in crosses)
    return 0.0 if inside else dmin


def fold_orientation_error(est_deg, true_deg):
    """Absolute yaw error folded into [0, 90] (box edges are 180-ambiguous
    and near-square fits can swap long/short)."""
    e = abs(est_deg - true_deg) % 180.0
    return min(e, 180.0 - e)


@dataclass
class MetricsReport:
    range_m: float
    length_m: float
    width_m: float
    height_m: float
    orientation_deg: float
    pct_surface_missed: float = None
    pct_fictitious: float = None
    range_error_m: float = None
    length_error_m: float = None
    width_error_m: float = None
    height_error_m: float = None
    orientation_error_deg: float = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def evaluate(
    candidate: DepthMap2D,
    ann: SceneAnnotations,
    truth: DepthMap2D = None,
    radar_origin_2d=(0.0, 0.0),
) -> MetricsReport:
    """Estimate the box metrics from a depth-map and compare to annotations.

    `truth` (a ground-truth depth-map in the same frame) additionally fills
    the surface-coverage percentages.
    """
    if ann.mask.shape != candidate.values.shape:
        raise DimensionMismatchError(
            f"annotation mask {ann.mask.shape} vs candidate {candidate.values.shape}"
        )
    try:
        cloud = to_point_cloud(candidate)
        box = estimate_box(cloud)
    except DegenerateCloudError:
        return MetricsReport(
            range_m=math.nan,
            length_m=math.nan,
            width_m=math.nan,
            height_m=math.nan,
            orientation_deg=math.nan,
            degenerate=True,
        )
    est_range = _polygon_distance(radar_origin_2d, box.corners())
    report = MetricsReport(
        range_m=est_range,
        length_m=box.length_m,
        width_m=box.width_m,
        height_m=box.height_m,
        orientation_deg=box.yaw_deg,
        range_error_m=abs(est_range - ann.range_m),
        length_error_m=abs(box.length_m - ann.length_m),
        width_error_m=abs(box.width_m - ann.width_m),
        height_error_m=abs(box.height_m - ann.height_m),
        orientation_error_deg=fold_orientation_error(box.yaw_deg, ann.yaw_deg),
    )
    if truth is not None:
        missed, fict = shape_metrics(candidate, truth)
        report.pct_surface_missed = missed
        report.pct_fictitious = fict
    return report


def aggregate_reports(reports):
    """Medians and 90th percentiles over the error fields of many reports."""
    fields = [
        "range_error_m",
        "length_error_m",
        "width_error_m",
        "height_error_m",
        "orientation_error_deg",
        "pct_surface_missed",
        "pct_fictitious",
    ]
    out = {"count": len(reports), "degenerate": sum(r.degenerate for r in reports)}
    for f in fields:
        vals = [getattr(r, f) for r in reports
                if getattr(r, f) is not None and not r.degenerate]
        if vals:
            out[f] = {
                "median": float(np.median(vals)),
                "p90": float(np.percentile(vals, 90)),
            }
    return out
