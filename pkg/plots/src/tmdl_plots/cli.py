"""Script entry point: render one figure from CSV paths."""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def build_parser():
    ap = argparse.ArgumentParser(prog="tmdl-plots",
                                 description="Render tmdl CSV outputs")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("csv", nargs="+", help="input CSV path(s)")
    ap.add_argument("--out", required=True, help="output image (.png or .svg)")
    ap.add_argument("--boundary", action="append", default=[],
                    help="boundary CSV overlay (phase-diagram only)")
    ap.add_argument("--label", action="append", default=[])
    ap.add_argument("--xlabel")
    ap.add_argument("--ylabel")
    ap.add_argument("--title")
    ap.add_argument("--timestamps", action="store_true",
                    help="keep writer timestamps in the image metadata")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, csv_paths=args.csv, output=args.out,
                    boundary_paths=args.boundary, labels=args.label,
                    xlabel=args.xlabel, ylabel=args.ylabel, title=args.title,
                    timestamps=args.timestamps)
    try:
        path = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
