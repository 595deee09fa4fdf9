#!/usr/bin/env python3
"""Greedy-lattice-animal event decay: exact-mode P(score >= c1 * 2^k over
size-2^k animals through the origin) across k and thinning levels."""

import argparse
from pathlib import Path

from hailsim.cli import run
from hailsim.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("out/gla"))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--replicas", type=int, default=200_000)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        kind="gla-ak",
        c1=1.0,
        k_grid=(0, 1, 2, 3),
        lambda_grid=(0.05, 0.1, 0.2),
        gla_dimension=1,
        gla_alpha=3.0,
        replicas=args.replicas,
        seed=args.seed,
        out_dir=str(args.out / "ak"),
    )
    out = run(cfg)
    print((out / "estimates.csv").read_text())


if __name__ == "__main__":
    main()
