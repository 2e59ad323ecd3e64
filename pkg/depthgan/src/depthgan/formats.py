"""Readers and writers for the radar dataset file formats.

These parse the simulator's external formats directly from their byte
layout so this package has no code dependency on the simulator:

* ``.hwke``: "HWKE" magic, u16 version, u16 n_az/n_el/n_range, six f32
  extents, then little-endian float32 power in C order of (az, el, range).
* ``.hwkd``: "HWKD" magic, u16 version, u16 width/height, four f32
  extents, then float32 depth meters, row-major, row 0 at the top of the
  frame (highest elevation). 0.0 marks invalid pixels.
* ``manifest.json``: per-sample file paths, seeds, config hash, and
  optional k-fold assignment.

The network operates on depth in grid orientation, an (az, el) array with
azimuth ascending along axis 0 and elevation ascending along axis 1. The
file frame is the transposed, vertically flipped image of that grid.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError

_HWKE_HEADER = "<4sHHHH6f"
_HWKD_HEADER = "<4sHHH4f"


@dataclass
class HeatMapFile:
    power: np.ndarray  # (n_az, n_el, n_range) float32
    az_min_deg: float
    az_max_deg: float
    el_min_deg: float
    el_max_deg: float
    r_min_m: float
    r_max_m: float


@dataclass
class DepthMapFile:
    values: np.ndarray  # (height, width) float32 meters, 0.0 = invalid
    az_min_deg: float
    az_max_deg: float
    el_min_deg: float
    el_max_deg: float


def load_heat_map(path) -> HeatMapFile:
    with open(path, "rb") as fh:
        blob = fh.read()
    head = struct.calcsize(_HWKE_HEADER)
    if len(blob) < head:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, n_az, n_el, n_rng, *ext = struct.unpack(_HWKE_HEADER, blob[:head])
    if magic != b"HWKE":
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != 1:
        raise FileFormatError(f"{path}: unsupported version {version}")
    body = blob[head:]
    if len(body) != n_az * n_el * n_rng * 4:
        raise FileFormatError(f"{path}: payload size mismatch")
    power = np.frombuffer(body, dtype="<f4").reshape(n_az, n_el, n_rng)
    return HeatMapFile(power.copy(), *ext)


def load_depth_map(path) -> DepthMapFile:
    with open(path, "rb") as fh:
        blob = fh.read()
    head = struct.calcsize(_HWKD_HEADER)
    if len(blob) < head:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, w, h, *ext = struct.unpack(_HWKD_HEADER, blob[:head])
    if magic != b"HWKD":
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != 1:
        raise FileFormatError(f"{path}: unsupported version {version}")
    body = blob[head:]
    if len(body) != h * w * 4:
        raise FileFormatError(f"{path}: payload size mismatch")
    values = np.frombuffer(body, dtype="<f4").reshape(h, w)
    return DepthMapFile(values.copy(), *ext)


def save_depth_map(d: DepthMapFile, path):
    h, w = d.values.shape
    header = struct.pack(
        _HWKD_HEADER, b"HWKD", 1, w, h,
        d.az_min_deg, d.az_max_deg, d.el_min_deg, d.el_max_deg,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(d.values, dtype="<f4").tobytes())


def depth_file_to_grid(values: np.ndarray) -> np.ndarray:
    """File frame (height, width) -> grid orientation (az, el)."""
    return np.ascontiguousarray(values[::-1].T)


def depth_grid_to_file(grid: np.ndarray) -> np.ndarray:
    """Grid orientation (az, el) -> file frame (height, width)."""
    return np.ascontiguousarray(grid.T[::-1])


@dataclass
class ManifestSample:
    sample_id: str
    heat_map: Path
    depth_map: Path
    annotations: Path
    fold: int  # -1 when the manifest carries no fold assignment


def load_manifest(path):
    """Returns (samples, config dict). Paths are resolved to absolute."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    try:
        records = doc["samples"]
        config = doc["config"]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: missing manifest key {exc}") from exc
    folds = doc.get("folds")
    assignment = folds["assignment"] if folds else [-1] * len(records)
    if len(assignment) != len(records):
        raise FileFormatError(f"{path}: fold assignment length mismatch")
    base = path.parent
    samples = []
    for rec, fold in zip(records, assignment):
        try:
            samples.append(
                ManifestSample(
                    sample_id=rec["sample_id"],
                    heat_map=base / rec["heat_map"],
                    depth_map=base / rec["depth_map"],
                    annotations=base / rec["annotations"],
                    fold=int(fold),
                )
            )
        except (KeyError, TypeError) as exc:
            raise FileFormatError(f"{path}: bad sample record: {exc}") from exc
    return samples, config
