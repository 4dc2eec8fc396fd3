"""Decoherence time against initial temperature for a hot aerosol particle.

Runs the tau-sweep task from ``configs/temperature_sweep.toml`` and prints the
cooled/uncooled ratio per slit separation.

    python scripts/temperature_sweep.py [--workers N] [--out DIR]
"""

import argparse
import math
from pathlib import Path

from decohere.config import load_config
from decohere.tasks import run_task
from decohere.tables import read_table

HERE = Path(__file__).resolve().parent


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="out/temperature_sweep")
    args = parser.parse_args()
    config = load_config(HERE / "configs" / "temperature_sweep.toml")
    written = run_task(config, Path(args.out), args.workers)
    table = read_table(written["tau_sweep"])
    print(f"{'d [nm]':>8} {'T0 [K]':>8} {'tau_th [s]':>12} {'tau_inf [s]':>12} {'ratio':>8}  status")
    for r in table.records():
        ratio = r["ratio"] if r["ratio"] is not None else math.nan
        print(f"{r['slit_separation_m'] * 1e9:8.0f} {r['T0_K']:8.1f} {r['tau_th_s']:12.4e} "
              f"{r['tau_inf_s']:12.4e} {ratio:8.4f}  {r['status']}")
    for name, path in written.items():
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
