"""Beam-pattern walkthrough: angular point-spread function vs. array size.

Beamforms a unit snapshot (a source at boresight) over a fine azimuth grid
for several aperture sizes and reports the first-null position, which
follows the Rayleigh limit of the aperture.
"""

import argparse
import math

import numpy as np

from mmwsim.config import ArrayConfig
from mmwsim.geometry import AngularGrid
from mmwsim.imager import beamform


def first_null_deg(n_elements):
    cfg = ArrayConfig(n_x=n_elements, n_z=1)
    approx = cfg.wavelength_m / (n_elements * cfg.spacing_m)
    span = math.asin(min(1.0, 3.0 * approx))
    grid = AngularGrid(-span, span, -1e-6, 1e-6, 6001, 1)
    h = beamform(np.ones((1, n_elements, 1)), cfg, grid)
    cut = h.power[:, 0, 0].astype(np.float64)
    az = grid.az_centers()
    right = az > 0.0
    c = cut[right]
    minima = np.where((c[1:-1] < c[:-2]) & (c[1:-1] < c[2:]))[0] + 1
    return math.degrees(az[right][minima[0]])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    args = parser.parse_args()

    print("uniform line array at half-wavelength spacing, 60.25 GHz:")
    prev = None
    for n in args.sizes:
        cfg = ArrayConfig(n_x=n, n_z=1)
        null = first_null_deg(n)
        aperture_cm = 100.0 * (n - 1) * cfg.spacing_m
        line = (
            f"  n = {n:3d}  aperture {aperture_cm:5.1f} cm  "
            f"first null at {null:5.2f} deg"
        )
        if prev is not None:
            line += f"  (x{null / prev:.2f} vs previous)"
        prev = null
        print(line)


if __name__ == "__main__":
    main()
