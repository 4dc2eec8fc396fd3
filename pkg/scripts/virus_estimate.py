"""Temperature at which a virus-sized particle loses coherence by heat radiation.

Solves tau_th(T) = tau with the closed-form greybody rate and compares with
the small-argument power law T ~ 19 K (d^2 tau / um^2 s)^(-1/5).
"""

import argparse
import math

from decohere.decoherence import decoherence_time_closed, decoherence_time_smallx, reduced_temperature
from decohere.numerics import find_root
from decohere.presets import VIRUS_AREA, double_slit, virus


def temperature_for(particle, d, tau):
    g = double_slit(particle, d)
    lt = find_root(lambda x: decoherence_time_closed(g, particle, math.exp(x)) - tau,
                   (0.0, math.log(1e4)))
    return math.exp(lt)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d", type=float, nargs="*", default=[0.5e-6, 1e-6, 2e-6], help="slit separations [m]")
    parser.add_argument("--tau", type=float, nargs="*", default=[0.1, 1.0], help="flight times [s]")
    args = parser.parse_args()
    p = virus()
    print(f"effective area {VIRUS_AREA:.3e} m^2")
    print(f"{'d [um]':>7} {'tau [s]':>8} {'T [K]':>8} {'x':>7} {'power law [K]':>14} {'small-x tau [s]':>16}")
    for d in args.d:
        for tau in args.tau:
            T = temperature_for(p, d, tau)
            law = 19.0 * (d * d * tau / 1e-12) ** -0.2
            small = decoherence_time_smallx(double_slit(p, d), p, T)
            print(f"{d * 1e6:7.2f} {tau:8.3f} {T:8.2f} {reduced_temperature(T, d):7.4f} {law:14.2f} {small:16.4g}")


if __name__ == "__main__":
    main()
