"""Top-level simulation configuration: schema validation and hashing."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .channel import ChannelConfig
from .errors import ConfigError
from .geometry import AngularGrid
from .rcs import RcsConfig
from .waveform import FmcwConfig

_GRID_FIELDS = {
    "az_span_deg",
    "el_span_deg",
    "n_az",
    "n_el",
    "n_range",
    "r_min_m",
    "r_max_m",
}


@dataclass
class ImagingGrid:
    """Angular grid plus the range axis of the 3D heat-map."""

    angular: AngularGrid
    r_min_m: float = 0.5
    r_max_m: float = 10.0
    n_range: int = 96

    def __post_init__(self):
        if not (0.0 <= self.r_min_m < self.r_max_m):
            raise ConfigError("grid range extents must satisfy 0 <= r_min < r_max")
        if self.n_range < 1:
            raise ConfigError("grid.n_range must be >= 1")

    @classmethod
    def default(cls):
        return cls(angular=AngularGrid.default())

    @classmethod
    def from_dict(cls, doc: dict) -> "ImagingGrid":
        unknown = set(doc) - _GRID_FIELDS
        if unknown:
            raise ConfigError(f"unknown grid config keys: {sorted(unknown)}")
        az_span = math.radians(doc.get("az_span_deg", 90.0))
        el_span = math.radians(doc.get("el_span_deg", 45.0))
        angular = AngularGrid(
            az_min=-az_span / 2.0,
            az_max=az_span / 2.0,
            el_min=-el_span / 2.0,
            el_max=el_span / 2.0,
            n_az=doc.get("n_az", 64),
            n_el=doc.get("n_el", 32),
        )
        return cls(
            angular=angular,
            r_min_m=doc.get("r_min_m", 0.5),
            r_max_m=doc.get("r_max_m", 10.0),
            n_range=doc.get("n_range", 96),
        )

    def range_centers(self):
        import numpy as np

        step = (self.r_max_m - self.r_min_m) / self.n_range
        return self.r_min_m + (np.arange(self.n_range) + 0.5) * step

    @property
    def range_bin_width(self):
        return (self.r_max_m - self.r_min_m) / self.n_range


@dataclass
class ArrayConfig:
    """Planar SAR element grid in the x-z plane, centered on the radar origin."""

    n_x: int = 40
    n_z: int = 40
    wavelength_m: float = 299_792_458.0 / 60.25e9
    spacing_m: float = None  # default half wavelength

    _FIELDS = {"n_x", "n_z", "wavelength_m", "spacing_m"}

    def __post_init__(self):
        if self.n_x < 1 or self.n_z < 1:
            raise ConfigError("array element counts must be >= 1")
        if self.spacing_m is None:
            self.spacing_m = self.wavelength_m / 2.0
        if self.spacing_m <= 0:
            raise ConfigError("array.spacing_m must be > 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "ArrayConfig":
        unknown = set(doc) - cls._FIELDS
        if unknown:
            raise ConfigError(f"unknown array config keys: {sorted(unknown)}")
        return cls(**doc)

    def aperture(self):
        """Per-axis spans (x, z) in meters: (N - 1) * d."""
        return (self.n_x - 1) * self.spacing_m, (self.n_z - 1) * self.spacing_m


_TOP_FIELDS = {"fmcw", "array", "channel", "rcs", "grid", "seed"}


@dataclass
class SimConfig:
    fmcw: FmcwConfig = field(default_factory=FmcwConfig)
    array: ArrayConfig = field(default_factory=ArrayConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    rcs: RcsConfig = field(default_factory=RcsConfig)
    grid: ImagingGrid = field(default_factory=ImagingGrid.default)
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(doc) - _TOP_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        fmcw = FmcwConfig.from_dict(doc.get("fmcw", {}))
        array = doc.get("array", {})
        if "wavelength_m" not in array:
            array = {**array, "wavelength_m": 299_792_458.0 / fmcw.carrier_hz}
        return cls(
            fmcw=fmcw,
            array=ArrayConfig.from_dict(array),
            channel=ChannelConfig.from_dict(doc.get("channel", {})),
            rcs=RcsConfig.from_dict(doc.get("rcs", {})),
            grid=ImagingGrid.from_dict(doc.get("grid", {})),
            seed=int(doc.get("seed", 0)),
        )

    @classmethod
    def load(cls, path) -> "SimConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "fmcw": {
                "carrier_hz": self.fmcw.carrier_hz,
                "bandwidth_hz": self.fmcw.bandwidth_hz,
                "sweep_s": self.fmcw.sweep_s,
                "sample_rate_hz": self.fmcw.sample_rate_hz,
                "samples_per_sweep": self.fmcw.samples_per_sweep,
                "window": self.fmcw.window,
            },
            "array": {
                "n_x": self.array.n_x,
                "n_z": self.array.n_z,
                "wavelength_m": self.array.wavelength_m,
                "spacing_m": self.array.spacing_m,
            },
            "channel": {
                "snr_db": self.channel.snr_db,
                "jitter_sigma_m": self.channel.jitter_sigma_m,
                "ground_reflection": {
                    "magnitude": abs(self.channel.ground_reflection),
                    "phase_deg": math.degrees(
                        math.atan2(
                            self.channel.ground_reflection.imag,
                            self.channel.ground_reflection.real,
                        )
                    ),
                },
                "multipath": self.channel.multipath,
                "seed": self.channel.seed,
            },
            "rcs": {
                "density": self.rcs.density,
                "specular_threshold_deg": self.rcs.specular_threshold_deg,
                "corner_dihedral_deg": self.rcs.corner_dihedral_deg,
                "corner_radius_m": self.rcs.corner_radius_m,
                "corner_gain": self.rcs.corner_gain,
                "seed": self.rcs.seed,
            },
            "grid": {
                "az_span_deg": math.degrees(g.angular.az_max - g.angular.az_min),
                "el_span_deg": math.degrees(g.angular.el_max - g.angular.el_min),
                "n_az": g.angular.n_az,
                "n_el": g.angular.n_el,
                "n_range": g.n_range,
                "r_min_m": g.r_min_m,
                "r_max_m": g.r_max_m,
            },
            "seed": self.seed,
        }


def canonical_json(doc) -> str:
    """Sorted-key JSON with no insignificant whitespace."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(doc) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()
