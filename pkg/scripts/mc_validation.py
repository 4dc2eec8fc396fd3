"""Monte Carlo emission histories against the analytic visibility.

For a 50 nm double slit and a 2500 K aerosol, picks flight times where the
analytic visibility is 0.9, 0.5 and 0.1 and compares both sampling modes.
"""

import argparse
import math
import time

from decohere.decoherence import visibility_thermal
from decohere.emission import EmissionModel
from decohere.montecarlo import estimate_visibility
from decohere.numerics import find_root
from decohere.presets import aerosol, double_slit


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--T0", type=float, default=2500.0)
    parser.add_argument("--d", type=float, default=50e-9)
    args = parser.parse_args()
    model = EmissionModel.greybody(aerosol(args.T0))
    g0 = double_slit(model.particle, args.d)
    for target in (0.9, 0.5, 0.1):
        lt = find_root(lambda x: visibility_thermal(g0.with_time_of_flight(math.exp(x)), model) - target,
                       (math.log(1e-9), math.log(1e-2)))
        g = g0.with_time_of_flight(math.exp(lt))
        V = visibility_thermal(g, model)
        for mode in ("poisson_cooling", "microcanonical"):
            start = time.perf_counter()
            mean, se = estimate_visibility(g, model, mode, args.trials, args.seed)
            print(f"tau = {g.time_of_flight:.4e} s  V = {V:.5f}  {mode:16s} {mean:.5f} +- {se:.1e}  "
                  f"z = {(mean - V) / se:+.2f}  ({time.perf_counter() - start:.1f} s)")


if __name__ == "__main__":
    main()
