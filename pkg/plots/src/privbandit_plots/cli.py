"""Command line: ``plots tradeoff <csv> <out>`` and ``plots ads <csv> <out>``."""

from __future__ import annotations

import argparse
import sys

from .figures import PlotSpec, plot_ads, plot_tradeoff
from .results import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render privbandit sweep CSVs into figures.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, blurb in (("tradeoff", "de-anonymization vs. regret per strategy"),
                        ("ads", "de-anonymization and identifiability vs. noise")):
        p = sub.add_parser(kind, help=blurb)
        p.add_argument("input_csv")
        p.add_argument("output")
        p.add_argument("--strategies", default="",
                       help="comma-separated strategy filter (default: all)")
        p.add_argument("--no-chance-line", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    strategies = tuple(s for s in args.strategies.split(",") if s)
    spec = PlotSpec(input_csv=args.input_csv, kind=args.kind, output=args.output,
                    strategies=strategies, chance_line=not args.no_chance_line)
    try:
        render = plot_tradeoff if args.kind == "tradeoff" else plot_ads
        path = render(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
