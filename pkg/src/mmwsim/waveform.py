"""FMCW beat-signal synthesis and range extraction.

Up-sweep dechirped (stop-and-hop) model: a path of round-trip length L,
one-way range R = L/2, contributes a tone at

    f_b = 2 R B / (c T)

with carrier phase exp(-j 2 pi f_c 2R/c) preserved for beamforming.

`spectral_snapshot` evaluates the windowed range FFT of that tone model in
closed form (Dirichlet kernels), bit-matching synthesize_beat + range_fft
at selected bins without building the time series; the full-array imaging
pipeline rides on it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, PathSet
from .errors import ConfigError, UnambiguousRangeError

C = 299_792_458.0

_WINDOWS = ("hann", "rect")


@dataclass
class FmcwConfig:
    carrier_hz: float = 60.25e9  # center of the 59.5-61 GHz sweep
    bandwidth_hz: float = 1.5e9
    sweep_s: float = 1e-3
    sample_rate_hz: float = 4.096e6
    samples_per_sweep: int = 4096
    window: str = "hann"

    _FIELDS = {
        "carrier_hz",
        "bandwidth_hz",
        "sweep_s",
        "sample_rate_hz",
        "samples_per_sweep",
        "window",
    }

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ConfigError("fmcw.bandwidth_hz must be > 0")
        if self.sweep_s <= 0:
            raise ConfigError("fmcw.sweep_s must be > 0")
        if self.carrier_hz <= 0:
            raise ConfigError("fmcw.carrier_hz must be > 0")
        if self.samples_per_sweep < 2:
            raise ConfigError("fmcw.samples_per_sweep must be >= 2")
        if self.window not in _WINDOWS:
            raise ConfigError(f"fmcw.window must be one of {_WINDOWS}")

    @classmethod
    def from_dict(cls, doc: dict) -> "FmcwConfig":
        unknown = set(doc) - cls._FIELDS
        if unknown:
            raise ConfigError(f"unknown fmcw config keys: {sorted(unknown)}")
        return cls(**doc)

    @property
    def wavelength(self):
        return C / self.carrier_hz

    @property
    def range_resolution(self):
        return C / (2.0 * self.bandwidth_hz)

    @property
    def unambiguous_range(self):
        """One-way range at which the beat reaches half the sample rate."""
        return self.sample_rate_hz / 2.0 * C * self.sweep_s / (2.0 * self.bandwidth_hz)

    def beat_frequency(self, one_way_range):
        return 2.0 * one_way_range * self.bandwidth_hz / (C * self.sweep_s)

    def default_fft_length(self):
        """Next power of two >= 4x samples per sweep (interpolated peaks)."""
        return 1 << math.ceil(math.log2(4 * self.samples_per_sweep))

    def window_samples(self):
        if self.window == "hann":
            return np.hanning(self.samples_per_sweep)
        return np.ones(self.samples_per_sweep)


@dataclass
class BeatSignal:
    samples: np.ndarray  # (n,) complex I/Q
    sample_rate_hz: float

    def __len__(self):
        return len(self.samples)


@dataclass
class RangeProfile:
    values: np.ndarray  # (fft_length,) complex, full spectrum
    bin_width_m: float  # range per FFT bin

    @property
    def ranges(self):
        return np.arange(len(self.values)) * self.bin_width_m

    @property
    def magnitude(self):
        return np.abs(self.values)


def noise_sigma(snr_db, reference_amplitude):
    """Per-sample complex-noise std for an SNR relative to a tone amplitude."""
    return reference_amplitude * 10.0 ** (-snr_db / 20.0)


def synthesize_beat(
    paths: PathSet,
    cfg: FmcwConfig,
    noise: ChannelConfig = None,
    noise_rng: np.random.Generator = None,
    reference_amplitude: float = None,
) -> BeatSignal:
    """Superpose one beat tone per path; optionally add thermal noise.

    Noise is added when both `noise` and `noise_rng` are given; the SNR is
    taken relative to `reference_amplitude` (default: strongest direct
    amplitude in this path set).
    """
    n = cfg.samples_per_sweep
    t = np.arange(n) / cfg.sample_rate_hz
    samples = np.zeros(n, dtype=np.complex128)
    if len(paths):
        one_way = paths.lengths / 2.0
        if np.any(one_way >= cfg.unambiguous_range):
            raise UnambiguousRangeError(
                f"path at {one_way.max():.1f} m exceeds unambiguous range "
                f"{cfg.unambiguous_range:.1f} m"
            )
        f_beat = cfg.beat_frequency(one_way)
        phase0 = -2.0 * math.pi * cfg.carrier_hz * (2.0 * one_way / C)
        active = paths.gains != 0.0
        for fb, p0, g in zip(f_beat[active], phase0[active], paths.gains[active]):
            samples += g * np.exp(1j * (2.0 * math.pi * fb * t + p0))
    if noise is not None and noise_rng is not None:
        if reference_amplitude is None:
            direct = (paths.kinds == 0) if len(paths) else np.zeros(0, bool)
            amps = np.abs(paths.gains[direct]) if len(paths) else np.zeros(0)
            reference_amplitude = float(amps.max()) if amps.size else 0.0
        sigma = noise_sigma(noise.snr_db, reference_amplitude)
        if sigma > 0.0:
            samples += sigma * (
                noise_rng.standard_normal(n) + 1j * noise_rng.standard_normal(n)
            ) / math.sqrt(2.0)
    return BeatSignal(samples, cfg.sample_rate_hz)


def range_fft(sig: BeatSignal, cfg: FmcwConfig, fft_length: int = None) -> RangeProfile:
    """Windowed FFT of the beat signal mapped to range bins."""
    n = len(sig)
    if fft_length is None:
        fft_length = cfg.default_fft_length()
    if fft_length < n:
        raise ConfigError("fft_length must be >= signal length")
    window = cfg.window_samples()
    if len(window) != n:
        raise ConfigError("signal length does not match fmcw.samples_per_sweep")
    spectrum = np.fft.fft(sig.samples * window, n=fft_length)
    freq_per_bin = sig.sample_rate_hz / fft_length
    bin_width = freq_per_bin * C * cfg.sweep_s / (2.0 * cfg.bandwidth_hz)
    return RangeProfile(spectrum, bin_width)


# ---------------------------------------------------------------------------
# Closed-form spectral path


def _dirichlet_ratio(half, n):
    """Real part sin(n t) / sin(t) of the Dirichlet kernel at t = theta / 2,
    stable at multiples of pi (limit n, via the cosine form)."""
    num = np.sin(n * half)
    den = np.sin(half)
    small = np.abs(den) < 1e-12
    if np.any(small):
        return np.where(
            small,
            float(n) * np.cos(n * half) / np.cos(half),
            num / np.where(small, 1.0, den),
        )
    return num / den


def _dirichlet(theta, n):
    """sum_{k=0}^{n-1} exp(j k theta), stable at theta -> multiples of 2 pi."""
    half = np.asarray(theta, dtype=np.float64) / 2.0
    return np.exp(1j * (n - 1) * half) * _dirichlet_ratio(half, n)


def window_transform(theta, cfg: FmcwConfig):
    """DTFT of the configured window at frequency offset theta rad/sample."""
    n = cfg.samples_per_sweep
    if cfg.window == "rect":
        return _dirichlet(theta, n)
    half = np.asarray(theta, dtype=np.float64) / 2.0
    hs = math.pi / (n - 1)  # half the np.hanning (symmetric) bin shift
    # the three shifted kernels share one phase factor up to scalar
    # constants: D(theta +/- s) = e^{j(n-1)theta/2} C+- r(theta +/- s)
    c_pos = cmath.exp(1j * (n - 1) * hs)
    c_neg = c_pos.conjugate()
    mix = (
        0.5 * _dirichlet_ratio(half, n)
        - (0.25 * c_pos) * _dirichlet_ratio(half + hs, n)
        - (0.25 * c_neg) * _dirichlet_ratio(half - hs, n)
    )
    return np.exp(1j * (n - 1) * half) * mix


def spectral_snapshot(
    lengths, gains, cfg: FmcwConfig, fft_bins, fft_length: int = None
):
    """Windowed range-FFT values at integer `fft_bins` for the tone model.

    lengths/gains may be 1-D (one element) or 2-D (elements, paths); returns
    values shaped like fft_bins, or (elements, len(fft_bins)). Equals
    range_fft(synthesize_beat(...)).values[fft_bins] to machine precision
    (noise excluded).
    """
    if fft_length is None:
        fft_length = cfg.default_fft_length()
    lengths = np.atleast_2d(np.asarray(lengths, dtype=np.float64))
    gains = np.atleast_2d(np.asarray(gains, dtype=np.complex128))
    bins = np.asarray(fft_bins, dtype=np.float64)
    one_way = lengths / 2.0
    if lengths.size and np.any(one_way >= cfg.unambiguous_range):
        raise UnambiguousRangeError("path exceeds unambiguous range")
    f_beat = cfg.beat_frequency(one_way)  # (e, p)
    phase0 = -2.0 * math.pi * cfg.carrier_hz * (2.0 * one_way / C)
    amp = gains * np.exp(1j * phase0)  # (e, p)
    # theta[e, p, b] = 2 pi (f_b / fs - bin / N)
    theta = 2.0 * math.pi * (
        (f_beat / cfg.sample_rate_hz)[:, :, None] - (bins / fft_length)[None, None, :]
    )
    out = np.einsum("ep,epb->eb", amp, window_transform(theta, cfg))
    return out if np.asarray(fft_bins).ndim else out[:, 0]
