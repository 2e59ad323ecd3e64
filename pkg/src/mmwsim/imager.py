"""SAR imaging: digital beamforming into 3D heat-maps and 2D projections.

Beamforming contract: each voxel is |sum_{k,l} S_{k,l} w_{k,l}(az, el)|^2
with the steering weight

    w_{k,l} = exp(-j (2 pi / lambda) (x_k u_x + z_l u_z)),
    u_x = sin(az) cos(el),  u_z = sin(el)

for element offsets (x_k, 0, z_l) from the radar origin. `beamform` uses a
factored matrix evaluation of that exact sum; `steering_sum_reference` is
the deliberately naive per-pixel loop kept as the oracle.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import channel as channel_mod
from . import groundtruth as gt_mod
from . import rcs as rcs_mod
from . import waveform as wf_mod
from .config import ArrayConfig, ImagingGrid, SimConfig
from .errors import DimensionMismatchError, FileFormatError
from .geometry import AngularGrid, Scene, pose_scene
from .perception import SceneAnnotations

_HWKE_MAGIC = b"HWKE"
_HWKE_VERSION = 1

_ELEMENT_CHUNK = 32


@dataclass
class HeatMap3D:
    """Reflected power over (azimuth, elevation, range) voxels."""

    power: np.ndarray  # (n_az, n_el, n_rng) float32, >= 0
    az_min_deg: float
    az_max_deg: float
    el_min_deg: float
    el_max_deg: float
    r_min_m: float
    r_max_m: float

    def __post_init__(self):
        self.power = np.asarray(self.power, dtype=np.float32)
        if self.power.ndim != 3:
            raise ValueError("heat-map must be 3-D")

    @property
    def shape(self):
        return self.power.shape

    def range_centers(self):
        n = self.power.shape[2]
        step = (self.r_max_m - self.r_min_m) / n
        return self.r_min_m + (np.arange(n) + 0.5) * step

    def extents(self):
        return (
            self.az_min_deg,
            self.az_max_deg,
            self.el_min_deg,
            self.el_max_deg,
            self.r_min_m,
            self.r_max_m,
        )


def save_heat_map(h: HeatMap3D, path):
    n_az, n_el, n_rng = h.power.shape
    header = struct.pack(
        "<4sHHHH6f", _HWKE_MAGIC, _HWKE_VERSION, n_az, n_el, n_rng, *h.extents()
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(h.power, dtype="<f4").tobytes())


def load_heat_map(path) -> HeatMap3D:
    with open(path, "rb") as fh:
        blob = fh.read()
    head_size = struct.calcsize("<4sHHHH6f")
    if len(blob) < head_size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, n_az, n_el, n_rng, *ext = struct.unpack("<4sHHHH6f", blob[:head_size])
    if magic != _HWKE_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != _HWKE_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    body = blob[head_size:]
    expected = n_az * n_el * n_rng * 4
    if len(body) != expected:
        raise FileFormatError(f"{path}: payload {len(body)} bytes, expected {expected}")
    power = np.frombuffer(body, dtype="<f4").reshape(n_az, n_el, n_rng)
    return HeatMap3D(power.copy(), *ext)


# ---------------------------------------------------------------------------
# Element layout and beamforming


def element_offsets(cfg: ArrayConfig):
    """(n_x, n_z, 3) element offsets on the centered x-z grid."""
    x = (np.arange(cfg.n_x) - (cfg.n_x - 1) / 2.0) * cfg.spacing_m
    z = (np.arange(cfg.n_z) - (cfg.n_z - 1) / 2.0) * cfg.spacing_m
    out = np.zeros((cfg.n_x, cfg.n_z, 3))
    out[..., 0] = x[:, None]
    out[..., 2] = z[None, :]
    return out


def element_positions(cfg: ArrayConfig, origin):
    return element_offsets(cfg) + np.asarray(origin, dtype=np.float64)


def _steering_factors(cfg: ArrayConfig, grid: AngularGrid):
    """Factored steering weights: F (n_x, n_az, n_el) and E (n_z, n_el)."""
    k_wave = 2.0 * math.pi / cfg.wavelength_m
    offs = element_offsets(cfg)
    x = offs[:, 0, 0]
    z = offs[0, :, 2]
    az = grid.az_centers()
    el = grid.el_centers()
    u_x = np.sin(az)[:, None] * np.cos(el)[None, :]  # (n_az, n_el)
    u_z = np.sin(el)  # (n_el,)
    f = np.exp(-1j * k_wave * x[:, None, None] * u_x[None, :, :])
    e = np.exp(-1j * k_wave * z[:, None] * u_z[None, :])
    return f, e


def beamform(snapshots, array_cfg: ArrayConfig, grid: AngularGrid,
             r_min_m=0.5, r_max_m=10.0) -> HeatMap3D:
    """Beamform per-range-bin snapshots (n_rng, n_x, n_z) into a heat-map."""
    snapshots = np.asarray(snapshots, dtype=np.complex128)
    if snapshots.ndim != 3 or snapshots.shape[1:] != (array_cfg.n_x, array_cfg.n_z):
        raise DimensionMismatchError(
            f"snapshots {snapshots.shape} do not match array "
            f"({array_cfg.n_x}, {array_cfg.n_z})"
        )
    f, e = _steering_factors(array_cfg, grid)
    v = np.einsum("rkl,le->rke", snapshots, e)
    out = np.einsum("rke,kae->rae", v, f)
    power = (out.real**2 + out.imag**2).transpose(1, 2, 0)
    return HeatMap3D(
        power.astype(np.float32),
        math.degrees(grid.az_min),
        math.degrees(grid.az_max),
        math.degrees(grid.el_min),
        math.degrees(grid.el_max),
        r_min_m,
        r_max_m,
    )


def steering_sum_reference(snapshot, array_cfg: ArrayConfig, grid: AngularGrid):
    """Direct per-pixel steering sum for one snapshot; oracle for beamform.

    Returns the complex angular map (n_az, n_el).
    """
    snapshot = np.asarray(snapshot, dtype=np.complex128)
    k_wave = 2.0 * math.pi / array_cfg.wavelength_m
    offs = element_offsets(array_cfg)
    x = offs[..., 0]
    z = offs[..., 2]
    out = np.empty((grid.n_az, grid.n_el), dtype=np.complex128)
    for i, az in enumerate(grid.az_centers()):
        for j, el in enumerate(grid.el_centers()):
            u_x = math.sin(az) * math.cos(el)
            u_z = math.sin(el)
            w = np.exp(-1j * k_wave * (x * u_x + z * u_z))
            out[i, j] = np.sum(snapshot * w)
    return out


# ---------------------------------------------------------------------------
# Heat-map projections


@dataclass
class RadarProjection2D:
    """Per-(az, el) top-m range bins by power, channel 0 = argmax."""

    indices: np.ndarray  # (m, n_az, n_el) int32 range-bin indices
    powers: np.ndarray  # (m, n_az, n_el) float32, descending along channels
    heat_map: HeatMap3D

    @property
    def m(self):
        return self.indices.shape[0]


def project_top_m(h: HeatMap3D, m: int = 8) -> RadarProjection2D:
    """Top-m range bins per angular pixel; power ties break toward the
    smaller range bin (stable sort over ascending bin index)."""
    n_rng = h.power.shape[2]
    if not (1 <= m <= n_rng):
        raise ValueError(f"m must be in [1, {n_rng}]")
    order = np.argsort(-h.power, axis=2, kind="stable")[:, :, :m]  # (az, el, m)
    powers = np.take_along_axis(h.power, order, axis=2)
    return RadarProjection2D(
        order.transpose(2, 0, 1).astype(np.int32),
        powers.transpose(2, 0, 1).astype(np.float32),
        h,
    )


def projection_to_depth_map(
    proj: RadarProjection2D, upscale: int = 4, threshold_rel: float = 0.05
) -> gt_mod.DepthMap2D:
    """Argmax-depth image from the heat-map, as a DepthMap2D.

    Pixels whose peak power falls below threshold_rel x global max are
    invalid. Nearest-neighbor upscaling matches the ground-truth frame.
    """
    h = proj.heat_map
    ranges = h.range_centers()
    depth = ranges[proj.indices[0]]  # (n_az, n_el)
    peak = proj.powers[0]
    cut = threshold_rel * float(peak.max()) if peak.size else 0.0
    depth = np.where(peak > cut, depth, gt_mod.INVALID_DEPTH)
    img = depth.T[::-1]  # rows top-down, cols = azimuth
    img = np.repeat(np.repeat(img, upscale, axis=0), upscale, axis=1)
    return gt_mod.DepthMap2D(
        img.astype(np.float32),
        h.az_min_deg,
        h.az_max_deg,
        h.el_min_deg,
        h.el_max_deg,
    )


# ---------------------------------------------------------------------------
# Full pipeline


def _fft_bins_for_ranges(grid: ImagingGrid, fmcw: wf_mod.FmcwConfig, fft_length):
    freqs = fmcw.beat_frequency(grid.range_centers())
    return np.round(freqs * fft_length / fmcw.sample_rate_hz).astype(np.int64)


def compute_snapshots(cloud, scene: Scene, sim: SimConfig, use_spectral=True):
    """Per-range-bin array snapshots (n_rng, n_x, n_z) for a reflector cloud.

    The spectral path evaluates the windowed range FFT of the beat model in
    closed form; use_spectral=False runs the literal per-element
    synthesize_beat + range_fft pipeline (slow; used for equivalence tests).
    """
    fmcw, arr, chan, grid = sim.fmcw, sim.array, sim.channel, sim.grid
    positions = element_positions(arr, scene.radar_origin).reshape(-1, 3)
    true_positions = channel_mod.jitter_positions(
        positions, chan.jitter_sigma_m, chan.seed
    )
    fft_length = fmcw.default_fft_length()
    bins = _fft_bins_for_ranges(grid, fmcw, fft_length)
    n_elem = len(positions)
    snapshots = np.zeros((grid.n_range, arr.n_x, arr.n_z), dtype=np.complex128)
    if len(cloud) == 0:
        return snapshots

    # global noise reference: strongest direct amplitude over all elements
    ref_amp = 0.0
    for start in range(0, n_elem, _ELEMENT_CHUNK):
        _, gains, kinds = channel_mod.trace_paths_block(
            cloud, true_positions[start : start + _ELEMENT_CHUNK], scene, chan
        )
        direct = kinds == channel_mod.PATH_DIRECT
        if direct.any():
            ref_amp = max(ref_amp, float(np.abs(gains[direct]).max()))
    sigma_t = wf_mod.noise_sigma(chan.snr_db, ref_amp)
    window = fmcw.window_samples()
    sigma_bin = sigma_t * math.sqrt(float(np.sum(window**2)))
    noise_root = np.random.SeedSequence(entropy=chan.seed, spawn_key=(0x5EED,))
    noise_children = noise_root.spawn(n_elem)

    flat = snapshots.reshape(grid.n_range, -1)
    for start in range(0, n_elem, _ELEMENT_CHUNK):
        lengths, gains, _kinds = channel_mod.trace_paths_block(
            cloud, true_positions[start : start + _ELEMENT_CHUNK], scene, chan
        )
        stop = start + len(lengths)
        if use_spectral:
            vals = wf_mod.spectral_snapshot(lengths, gains, fmcw, bins, fft_length)
        else:
            vals = np.empty((len(lengths), grid.n_range), dtype=np.complex128)
            for e in range(len(lengths)):
                paths = channel_mod.PathSet(
                    lengths[e], gains[e], np.zeros(lengths.shape[1], np.uint8)
                )
                beat = wf_mod.synthesize_beat(paths, fmcw)
                profile = wf_mod.range_fft(beat, fmcw, fft_length)
                vals[e] = profile.values[bins]
        if sigma_bin > 0.0:
            for e in range(start, stop):
                rng = np.random.default_rng(noise_children[e])
                vals[e - start] += sigma_bin * (
                    rng.standard_normal(grid.n_range)
                    + 1j * rng.standard_normal(grid.n_range)
                ) / math.sqrt(2.0)
        flat[:, start:stop] = vals.T
    return snapshots


def _annotations(scene: Scene, posed: Scene, depth: gt_mod.DepthMap2D) -> SceneAnnotations:
    """True box metrics from the first vehicle; closest corner over all."""
    if not scene.objects:
        return SceneAnnotations(0.0, 0.0, 0.0, 0.0, 0.0, depth.valid)
    first = scene.objects[0]
    lo, hi = first.mesh.bounds()
    dims = hi - lo
    length, width, height = float(dims[0]), float(dims[1]), float(dims[2])
    # heading of the long axis measured from +y (north), matching the
    # convention of the oriented-box estimator; meshes point along +x at yaw 0
    yaw_deg = (90.0 - math.degrees(first.pose.yaw)) % 360.0
    origin2 = scene.radar_origin[:2]
    best = math.inf
    for obj, posed_obj in zip(scene.objects, posed.objects):
        olo, ohi = obj.mesh.bounds()
        corners = np.array(
            [[x, y, olo[2]] for x in (olo[0], ohi[0]) for y in (olo[1], ohi[1])]
        )
        world = obj.pose.apply(corners)[:, :2]
        best = min(best, float(np.linalg.norm(world - origin2, axis=1).min()))
    return SceneAnnotations(best, length, width, height, yaw_deg, depth.valid)


def simulate_sample(scene: Scene, sim: SimConfig, gt_upscale: int = 4):
    """scene -> (HeatMap3D, ground-truth DepthMap2D, SceneAnnotations)."""
    posed = pose_scene(scene)
    cloud = rcs_mod.build_cloud(posed, sim.rcs)
    snapshots = compute_snapshots(cloud, posed, sim)
    h = beamform(snapshots, sim.array, sim.grid.angular, sim.grid.r_min_m,
                 sim.grid.r_max_m)
    peak = float(h.power.max())
    if peak > 0.0:
        h.power /= peak  # normalize per sample for training stability
    depth = gt_mod.render_depth(
        posed,
        width=sim.grid.angular.n_az * gt_upscale,
        height=sim.grid.angular.n_el * gt_upscale,
        grid=sim.grid.angular,
    )
    ann = _annotations(scene, posed, depth)
    return h, depth, ann
