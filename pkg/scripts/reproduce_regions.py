"""Rate regions of both example scenarios at several power levels.

Writes ``<out>/<scenario>_p<P>/<scheme>.csv`` frontiers and prints whether
the scheme ordering and the growth with power hold within two standard
errors.

    python3 scripts/reproduce_regions.py --samples 100000 --out results
"""
import argparse
import dataclasses
from pathlib import Path

from secrecy_region import build_region, dominates, draw_batches
from secrecy_region.cli import load_config, write_csv

ROOT = Path(__file__).resolve().parent.parent
CHAIN = ("full-csit", "statistical-csit", "interference-as-noise", "time-sharing")


def contains(upper, lower):
    return dominates(upper.frontier, lower.frontier, 2 * max(upper.max_stderr, lower.max_stderr))


def main():
    parser = argparse.ArgumentParser(description="Rate regions of the example scenarios")
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--powers", type=float, nargs="+", default=[1.0, 10.0, 20.0])
    parser.add_argument("--out", type=Path, default=ROOT / "results")
    args = parser.parse_args()
    powers = sorted(args.powers, reverse=True)

    regions = {}
    for name in ("rayleigh", "rician"):
        base = load_config(ROOT / "configs" / f"{name}.toml").scenario
        for p in powers:
            sc = dataclasses.replace(base, total_power=p, mc_samples=args.samples)
            batches = draw_batches(sc)
            out = args.out / f"{name}_p{p:g}"
            out.mkdir(parents=True, exist_ok=True)
            for scheme in CHAIN:
                regions[name, p, scheme] = result = build_region(sc, scheme, batches)
                write_csv(out / f"{scheme}.csv", result.frontier)
            chain = all(contains(regions[name, p, a], regions[name, p, b]) for a, b in zip(CHAIN, CHAIN[1:]))
            best = regions[name, p, "statistical-csit"]
            print(f"{name:8s} P={p:<4g} max r1 {max(x.r1 for x in best.raw_points):.4f} "
                  f"max r2 {max(x.r2 for x in best.raw_points):.4f}  scheme chain holds: {chain}")

    for name in ("rayleigh", "rician"):
        for hi, lo in zip(powers, powers[1:]):
            print(f"{name}: P={hi:g} contains P={lo:g}: "
                  f"{contains(regions[name, hi, 'statistical-csit'], regions[name, lo, 'statistical-csit'])}")
    for p in powers:
        print(f"P={p:g}: rician contains rayleigh: "
              f"{contains(regions['rician', p, 'statistical-csit'], regions['rayleigh', p, 'statistical-csit'])}")


if __name__ == "__main__":
    main()
