"""Decoherence times for a spectrum with an absorption edge at 800 nm.

Compares slit separations on both sides of the edge; writes a spectrum file
usable with ``emission.model = "tabulated"``.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from decohere.constants import AMU, C
from decohere.decoherence import decoherence_time_inverted, decoherence_time_quadrature
from decohere.emission import EmissionModel, ParticleModel, write_spectrum
from decohere.presets import double_slit


def step_spectrum(area, edge=800e-9, w_max=1e17):
    w_gap = 2 * math.pi * C / edge
    return np.array([0.0, w_gap * (1 - 1e-9), w_gap, w_max]), np.array([0.0, 0.0, area / 4, area / 4])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--area", type=float, default=1e-22, help="effective area [m^2]")
    parser.add_argument("--cv", type=float, default=204.0, help="heat capacity [k_B]")
    parser.add_argument("--mass", type=float, default=840.0, help="mass [amu]")
    parser.add_argument("--out", default="out/band_gap")
    args = parser.parse_args()
    omega, sigma = step_spectrum(args.area)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"spectrum: {write_spectrum(out / 'step_800nm.csv', omega, sigma)}")
    seps = (5e-8, 5e-7, 1e-6)
    print(f"{'T0 [K]':>8} " + " ".join(f"{'tau ' + str(round(d * 1e9)) + ' nm':>14}" for d in seps)
          + f" {'500/1000':>9} {'rigid 500/1000':>15}")
    for T in np.geomspace(300, 5000, 13):
        p = ParticleModel.from_kb(args.area, args.cv, args.mass * AMU, T)
        m = EmissionModel.tabulated(p, omega, sigma)
        taus = [decoherence_time_inverted(double_slit(p, d), m, True).value for d in seps]
        rigid = [decoherence_time_quadrature(double_slit(p, d), m, T) for d in seps[1:]]
        ratio = taus[1] / taus[2] if math.isfinite(taus[2]) else math.nan
        print(f"{T:8.1f} " + " ".join(f"{t:14.4e}" for t in taus)
              + f" {ratio:9.4f} {rigid[0] / rigid[1]:15.4f}")


if __name__ == "__main__":
    main()
