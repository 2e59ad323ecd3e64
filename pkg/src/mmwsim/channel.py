"""RF channel tracing: direct monostatic returns plus single ground bounce.

Path lengths are full round trips (transmit leg + return leg). Amplitudes
follow reflectivity / (one-way range)^2 spreading. Specular-class points
keep their path entries but with zero direct amplitude; the ground-bounce
ghost (mirror-image method, applied to the return leg so the ghost arrives
from below the direct return) is traced regardless of class.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import Scene
from .rcs import CLASS_SPECULAR, PointReflectorCloud

PATH_DIRECT = 0
PATH_GROUND_BOUNCE = 1


@dataclass
class ChannelConfig:
    snr_db: float = 20.0  # relative to the strongest direct return
    jitter_sigma_m: float = 2e-4  # antenna position error, per axis
    ground_reflection: complex = complex(-0.5, 0.0)  # 0.5 at 180 degrees
    multipath: bool = True
    seed: int = 0

    _FIELDS = {"snr_db", "jitter_sigma_m", "ground_reflection", "multipath", "seed"}

    def __post_init__(self):
        if self.jitter_sigma_m < 0:
            raise ConfigError("channel.jitter_sigma_m must be >= 0")
        if not math.isfinite(self.snr_db):
            raise ConfigError("channel.snr_db must be finite")
        if abs(self.ground_reflection) > 1.0 + 1e-12:
            raise ConfigError("|ground_reflection| must be <= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "ChannelConfig":
        doc = dict(doc)
        unknown = set(doc) - cls._FIELDS
        if unknown:
            raise ConfigError(f"unknown channel config keys: {sorted(unknown)}")
        gr = doc.get("ground_reflection")
        if isinstance(gr, dict):
            extra = set(gr) - {"magnitude", "phase_deg"}
            if extra:
                raise ConfigError(f"unknown ground_reflection keys: {sorted(extra)}")
            doc["ground_reflection"] = gr.get("magnitude", 0.5) * cmath.exp(
                1j * math.radians(gr.get("phase_deg", 180.0))
            )
        return cls(**doc)


@dataclass
class PathSet:
    """Propagation paths for one array element, struct-of-arrays."""

    lengths: np.ndarray  # (p,) round-trip meters
    gains: np.ndarray  # (p,) complex amplitude (no carrier phase)
    kinds: np.ndarray  # (p,) uint8 PATH_* codes
    reflector_index: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.lengths)


def trace_paths(
    cloud: PointReflectorCloud,
    element_position,
    scene: Scene,
    cfg: ChannelConfig,
    tx_position=None,
) -> PathSet:
    """Trace paths tx -> reflector -> element for every reflector.

    The transmitter defaults to the scene radar origin; SAR scans only the
    receive element, which keeps the one-way phase gradient across the
    aperture that digital beamforming assumes.
    """
    rx = np.asarray(element_position, dtype=np.float64).reshape(3)
    tx = scene.radar_origin if tx_position is None else np.asarray(tx_position, float)
    if rx[2] <= scene.ground_height or tx[2] <= scene.ground_height:
        raise ConfigError("antenna positions must be above the ground plane")
    lengths, gains, kinds, ridx = _trace_many(cloud, rx[None, :], tx, scene, cfg)
    return PathSet(lengths[0], gains[0], kinds[0], ridx)


def _trace_many(cloud, rx_positions, tx, scene, cfg):
    """Vectorized tracing for a block of element positions.

    Returns arrays shaped (n_elements, n_paths) with the path layout
    [direct paths..., bounce paths...] (bounce block only when multipath).
    """
    p = cloud.positions  # (n, 3)
    refl = cloud.reflectivity
    tx_leg = np.linalg.norm(p - tx[None, :], axis=1)  # (n,)
    rx_leg = np.linalg.norm(
        p[None, :, :] - rx_positions[:, None, :], axis=2
    )  # (e, n)
    direct_len = tx_leg[None, :] + rx_leg
    direct_amp = refl[None, :] / (direct_len / 2.0) ** 2
    direct_amp = np.where(cloud.classes[None, :] == CLASS_SPECULAR, 0.0, direct_amp)
    blocks_len = [direct_len]
    blocks_gain = [direct_amp.astype(np.complex128)]
    blocks_kind = [np.full(direct_len.shape, PATH_DIRECT, dtype=np.uint8)]
    if cfg.multipath:
        # bounce on the return leg: the array sees the reflector's mirror
        # image below the ground plane, so the ghost arrives from a lower
        # elevation than the direct return
        p_mirror = p.copy()
        p_mirror[:, 2] = 2.0 * scene.ground_height - p[:, 2]
        bounce_rx_leg = np.linalg.norm(
            p_mirror[None, :, :] - rx_positions[:, None, :], axis=2
        )
        bounce_len = tx_leg[None, :] + bounce_rx_leg
        bounce_gain = (
            cfg.ground_reflection * refl[None, :] / (bounce_len / 2.0) ** 2
        )
        blocks_len.append(bounce_len)
        blocks_gain.append(bounce_gain)
        blocks_kind.append(np.full(bounce_len.shape, PATH_GROUND_BOUNCE, dtype=np.uint8))
    ridx = np.arange(len(p), dtype=np.int64)
    ridx = np.concatenate([ridx] * len(blocks_len))
    return (
        np.concatenate(blocks_len, axis=1),
        np.concatenate(blocks_gain, axis=1),
        np.concatenate(blocks_kind, axis=1),
        ridx,
    )


def trace_paths_block(cloud, rx_positions, scene, cfg, tx_position=None):
    """trace_paths for many elements at once; returns (lengths, gains, kinds)
    arrays shaped (n_elements, n_paths)."""
    tx = scene.radar_origin if tx_position is None else np.asarray(tx_position, float)
    rx_positions = np.asarray(rx_positions, dtype=np.float64)
    if np.any(rx_positions[:, 2] <= scene.ground_height):
        raise ConfigError("antenna positions must be above the ground plane")
    lengths, gains, kinds, _ = _trace_many(cloud, rx_positions, tx, scene, cfg)
    return lengths, gains, kinds


def jitter_positions(positions, sigma, seed):
    """Deterministic per-axis Gaussian position error for SAR elements."""
    positions = np.asarray(positions, dtype=np.float64)
    if sigma == 0.0:
        return positions.copy()
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xA17,)))
    return positions + rng.normal(0.0, sigma, size=positions.shape)
