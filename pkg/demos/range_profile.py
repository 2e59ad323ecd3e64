"""Range-resolution walkthrough: two point targets under different sweeps.

Synthesizes FMCW beat signals for a pair of equal reflectors and shows how
the range profile separates them (or fails to) as the sweep bandwidth
changes. The c/2B law predicts the break-even separation.
"""

import argparse

import numpy as np

from mmwsim.channel import PathSet
from mmwsim.waveform import C, FmcwConfig, range_fft, synthesize_beat


def profile_peaks(separation_m, bandwidth_hz):
    """Count distinct range-profile peaks for two targets this far apart."""
    cfg = FmcwConfig(
        bandwidth_hz=bandwidth_hz,
        sample_rate_hz=1.024e6,
        samples_per_sweep=1024,
        window="rect",
    )
    ranges = np.array([6.0, 6.0 + separation_m])
    paths = PathSet(2.0 * ranges, np.ones(2, complex), np.zeros(2, np.uint8))
    prof = range_fft(synthesize_beat(paths, cfg), cfg, fft_length=4096)
    mag = prof.magnitude
    lo = int(5.0 / prof.bin_width_m)
    hi = int(8.0 / prof.bin_width_m)
    m = mag[lo:hi]
    mid = m[1:-1]
    peaks = (mid > m[:-2]) & (mid > m[2:]) & (mid > 0.5 * m.max())
    return int(np.count_nonzero(peaks))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--separation-cm", type=float, default=20.0)
    args = parser.parse_args()

    sep = args.separation_cm / 100.0
    print(f"two targets {args.separation_cm:.0f} cm apart:")
    for bw_ghz in (0.5, 1.0, 1.5, 2.0):
        res = C / (2.0 * bw_ghz * 1e9)
        n = profile_peaks(sep, bw_ghz * 1e9)
        verdict = "resolved" if n >= 2 else "merged"
        print(
            f"  B = {bw_ghz:3.1f} GHz  (c/2B = {100 * res:5.1f} cm)  ->  "
            f"{n} peak(s), {verdict}"
        )


if __name__ == "__main__":
    main()
