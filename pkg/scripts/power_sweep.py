"""Pre-clamp secrecy bounds against total power for fixed beam directions.

Directions are selected once at the configured power and then held fixed
while the power varies, with the inflation factor at zero. Prints any step
where a bound decreases.
"""
import argparse
import dataclasses
from pathlib import Path

import numpy as np

from secrecy_region import ORDERS, InflationFactor, TransmitCovariances, draw_batches, select_covariances
from secrecy_region.cli import load_config
from secrecy_region.region_math import secrecy_bounds

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description="Bounds versus power for fixed directions")
    parser.add_argument("--config", type=Path, default=ROOT / "configs" / "rayleigh.toml")
    parser.add_argument("--samples", type=int, default=20_000)
    parser.add_argument("--max-power", type=float, default=20.0)
    args = parser.parse_args()
    sc = dataclasses.replace(load_config(args.config).scenario, mc_samples=args.samples)
    batches = draw_batches(sc)
    powers = np.linspace(0.0, args.max_power, 41)
    zero = InflationFactor.zeros(1, sc.n_t)

    for order in ORDERS:
        for alpha in np.linspace(0.1, 0.9, 9):
            ref = select_covariances(sc, alpha, order)
            e1 = ref.t1[:, 0] / np.linalg.norm(ref.t1)
            e2 = np.linalg.eigh(ref.k_u2)[1][:, -1]
            bounds = np.array([secrecy_bounds(TransmitCovariances.from_directions(e1, e2, alpha, p),
                                              zero, *batches, order)[:2] for p in powers])
            drops = [(k, powers[i + 1]) for k in (0, 1) for i in np.flatnonzero(np.diff(bounds[:, k]) < -1e-12)]
            status = "monotone" if not drops else "decreases: " + ", ".join(
                f"{'first' if k == 0 else 'second'} bound at P={p:g}" for k, p in drops)
            print(f"order {order} alpha {alpha:.1f}: {status}")


if __name__ == "__main__":
    main()
