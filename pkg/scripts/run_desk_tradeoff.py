#!/usr/bin/env python3
"""Desk-scale privacy-vs-regret sweep on a synthetic CASAS-shaped cohort.

Runs every strategy across a thinned noise/rank grid so the whole table
finishes in minutes; pass --full for the 50-point grid (slow). Writes the
result table plus per-row regret-curve companions.
"""

import argparse
import dataclasses
from pathlib import Path

from privbandit.anonymize import StrategySpec
from privbandit.harness import config_from_preset, run_tradeoff, write_sweep

STRATEGIES = (
    StrategySpec(kind="none"),
    StrategySpec(kind="laplace", epsilon=0.0),
    StrategySpec(kind="tsvd", rank=1),
    StrategySpec(kind="nn"),
    StrategySpec(kind="second-nn"),
    StrategySpec(kind="cluster-average"),
    StrategySpec(kind="cluster-average", multiplier=2),
    StrategySpec(kind="cluster-average", multiplier=3),
    StrategySpec(kind="global-average"),
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="desk-casas")
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--runs", type=int, default=40,
                        help="episodes per grid point (split across users)")
    parser.add_argument("--full", action="store_true",
                        help="keep the preset's full 50-point grids")
    parser.add_argument("--out", default="results/desk_tradeoff.csv")
    args = parser.parse_args()

    config = config_from_preset(args.preset, base_seed=args.seed, runs=args.runs,
                                strategies=STRATEGIES)
    if not args.full:
        ranks = config.rank_grid()
        thin = ranks[:: max(1, len(ranks) // 6)]
        if thin[-1] != 1:
            thin = thin + (1,)
        config = dataclasses.replace(config, noise_points=8, ranks=thin)

    rows = run_tradeoff(config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep(out, rows, config, curves_dir=out.with_suffix(".curves"))
    print(f"{len(rows)} rows -> {out}")


if __name__ == "__main__":
    main()
