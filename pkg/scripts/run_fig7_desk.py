#!/usr/bin/env python3
"""Desk-scale de-anonymization + identifiability vs. Laplace noise.

Sweeps the noise grid for every auxiliary-cell budget of the chosen preset
and writes one table suitable for the ads plot. Finishes in well under a
minute on the desk presets.
"""

import argparse
from pathlib import Path

from privbandit.anonymize import StrategySpec
from privbandit.harness import config_from_preset, run_ads_sweep, write_sweep


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="desk-casas")
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--out", default="results/desk_ads.csv")
    args = parser.parse_args()

    config = config_from_preset(
        args.preset, base_seed=args.seed,
        strategies=(StrategySpec(kind="laplace", epsilon=0.0),))
    rows = run_ads_sweep(config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep(out, rows, config)
    print(f"{len(rows)} rows -> {out}")


if __name__ == "__main__":
    main()
