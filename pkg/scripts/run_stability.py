#!/usr/bin/env python3
"""Stability-regime sweep: backward-coupled horizon plateau at several rates.

Writes one run directory per rate under --out and prints the plateau
fraction, which should approach 1 as the rate drops.
"""

import argparse
from pathlib import Path

from hailsim.cli import run
from hailsim.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("out/stability"))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--replicas", type=int, default=200)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    args = ap.parse_args()

    for lam in args.rates:
        cfg = ExperimentConfig(
            kind="stability",
            lam=lam,
            alpha_tau=3.0,
            alpha_radius=3.0,
            window=64,
            n_max=64,
            n_grid=(4, 8, 16, 32, 64),
            replicas=args.replicas,
            seed=args.seed,
            out_dir=str(args.out / f"lam_{lam}"),
        )
        out = run(cfg)
        stats = (out / "stats.csv").read_text().strip().splitlines()[1].split(",")
        print(f"lambda={lam}: plateau_fraction={stats[2]} (run dir {out})")


if __name__ == "__main__":
    main()
