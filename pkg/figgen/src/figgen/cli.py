"""Command line: render one figure analog from a directory of CSV artifacts."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_IDS, FigureSpec, default_inputs, render
from .schemas import SchemaError


def _parse_range(text: str) -> tuple[float, float]:
    lo, hi = text.split(",")
    return float(lo), float(hi)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render a figure analog from simulator CSV output.",
    )
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("--in", dest="in_dir", required=True, help="directory with the CSV artifacts")
    parser.add_argument("--out", required=True, help="output image file (.svg default, .png/.pdf by extension)")
    parser.add_argument("--raster", action="store_true", help="write PNG when --out has no extension")
    parser.add_argument("--xlim", type=_parse_range, help="x axis range as 'lo,hi'")
    parser.add_argument("--ylim", type=_parse_range, help="y axis range as 'lo,hi'")
    args = parser.parse_args(argv)

    out = Path(args.out)
    if not out.suffix:
        out = out.with_suffix(".png" if args.raster else ".svg")
    ranges = {}
    if args.xlim:
        ranges["x"] = args.xlim
    if args.ylim:
        ranges["y"] = args.ylim

    try:
        spec = FigureSpec(
            figure_id=args.figure_id,
            inputs=default_inputs(args.figure_id, Path(args.in_dir)),
            output=out,
            axis_ranges=ranges,
        )
        summary = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.figure_id}: wrote {summary['output']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
