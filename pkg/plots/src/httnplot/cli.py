"""``plot-ratio``: render the decay-ratio figure from CSV logs."""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, SchemaError, render_ratio_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-ratio",
        description="measured vs predicted decay ratios, per layer count")
    parser.add_argument("--csv", required=True, nargs="+",
                        help="decay CSV file(s)")
    parser.add_argument("--out", required=True,
                        help="output image path (.svg and .png are written)")
    parser.add_argument("--group-key", default="L",
                        help="column that separates series (default: L)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(csv_paths=tuple(args.csv), out_path=args.out,
                  group_key=args.group_key)
    try:
        written = render_ratio_figure(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
