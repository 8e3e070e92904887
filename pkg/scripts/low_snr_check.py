"""Compare the statistical-CSIT region with its linear low-power asymptote.

For each power the largest rate of each user over the alpha sweep is divided
by the asymptote; the ratio should approach one as the power shrinks.
"""
import argparse
import dataclasses
from pathlib import Path

from secrecy_region import build_region, low_snr_region
from secrecy_region.cli import load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description="Low-power asymptote check")
    parser.add_argument("--config", type=Path, default=ROOT / "configs" / "rayleigh.toml")
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--powers", type=float, nargs="+", default=[1.0, 1e-1, 1e-2, 1e-3])
    args = parser.parse_args()
    base = load_config(args.config).scenario

    print(f"{'P_T':>8} {'max r1':>12} {'asym r1':>12} {'ratio':>7} {'max r2':>12} {'asym r2':>12} {'ratio':>7}")
    for p in args.powers:
        sc = dataclasses.replace(base, total_power=p, mc_samples=args.samples)
        raw = build_region(sc, "statistical-csit").raw_points
        r1, r2 = max(x.r1 for x in raw), max(x.r2 for x in raw)
        a1 = low_snr_region(sc.user1, sc.user2, p, 1.0).r1
        a2 = low_snr_region(sc.user1, sc.user2, p, 0.0).r2
        print(f"{p:8.0e} {r1:12.5e} {a1:12.5e} {r1 / a1:7.3f} {r2:12.5e} {a2:12.5e} {r2 / a2:7.3f}")


if __name__ == "__main__":
    main()
