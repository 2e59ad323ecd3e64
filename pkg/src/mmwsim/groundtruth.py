"""Ground-truth 2D depth-maps: exact mesh ray casting at output resolution.

Pixel layout: values[row, col] with row 0 at the top of the frame (highest
elevation) and col 0 at the leftmost azimuth (az_min). Invalid pixels hold
the sentinel 0.0 (valid depths are strictly positive).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FileFormatError
from .geometry import AngularGrid, Scene, spherical_project

INVALID_DEPTH = 0.0

_HWKD_MAGIC = b"HWKD"
_HWKD_VERSION = 1


@dataclass
class DepthMap2D:
    values: np.ndarray  # (h, w) float32 meters, 0.0 = invalid
    az_min_deg: float
    az_max_deg: float
    el_min_deg: float
    el_max_deg: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("depth map must be 2-D")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def valid(self):
        return self.values > 0.0

    def same_frame(self, other: "DepthMap2D") -> bool:
        return self.values.shape == other.values.shape and (
            (self.az_min_deg, self.az_max_deg, self.el_min_deg, self.el_max_deg)
            == (other.az_min_deg, other.az_max_deg, other.el_min_deg, other.el_max_deg)
        )

    def pixel_angles(self):
        """(az, el) radians per pixel, each shaped (h, w)."""
        az_step = math.radians(self.az_max_deg - self.az_min_deg) / self.width
        el_step = math.radians(self.el_max_deg - self.el_min_deg) / self.height
        az = math.radians(self.az_min_deg) + (np.arange(self.width) + 0.5) * az_step
        el = math.radians(self.el_max_deg) - (np.arange(self.height) + 0.5) * el_step
        return np.broadcast_arrays(az[None, :], el[:, None])


def render_depth(scene: Scene, width: int = 256, height: int = 128,
                 grid: AngularGrid = None) -> DepthMap2D:
    """Ray-cast vehicle meshes only; ground and background stay invalid."""
    if grid is None:
        grid = AngularGrid.default(n_az=width, n_el=height)
    else:
        grid = AngularGrid(grid.az_min, grid.az_max, grid.el_min, grid.el_max,
                           width, height)
    proj = spherical_project(scene, grid)
    # projection arrays are (az, el) with el ascending; image rows run top-down
    values = proj.depth.T[::-1].astype(np.float32)
    return DepthMap2D(
        values,
        math.degrees(grid.az_min),
        math.degrees(grid.az_max),
        math.degrees(grid.el_min),
        math.degrees(grid.el_max),
    )


def save_depth_map(d: DepthMap2D, path):
    header = struct.pack(
        "<4sHHH4f",
        _HWKD_MAGIC,
        _HWKD_VERSION,
        d.width,
        d.height,
        d.az_min_deg,
        d.az_max_deg,
        d.el_min_deg,
        d.el_max_deg,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(d.values, dtype="<f4").tobytes())


def load_depth_map(path) -> DepthMap2D:
    with open(path, "rb") as fh:
        blob = fh.read()
    head_size = struct.calcsize("<4sHHH4f")
    if len(blob) < head_size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, w, h, az0, az1, el0, el1 = struct.unpack(
        "<4sHHH4f", blob[:head_size]
    )
    if magic != _HWKD_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != _HWKD_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    expected = h * w * 4
    body = blob[head_size:]
    if len(body) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(body)} bytes, expected {expected}"
        )
    values = np.frombuffer(body, dtype="<f4").reshape(h, w)
    return DepthMap2D(values.copy(), az0, az1, el0, el1)


def depth_map_to_png(d: DepthMap2D, path):
    """16-bit grayscale PNG in millimeters; invalid pixels stay 0."""
    from PIL import Image

    mm = np.clip(np.nan_to_num(d.values) * 1000.0, 0, 65535).astype(np.uint16)
    Image.fromarray(mm).save(path)
