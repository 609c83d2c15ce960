#!/usr/bin/env python3
"""Perturbative boundaries for coupling-ratio deviations g2/g1 at N = 3."""
import argparse
from pathlib import Path

from tmdl.cli import main as tmdl_main

RATIOS = (1.0, 1.02, 1.05, 1.1)


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/deviation_boundaries")
    ap.add_argument("--fast", action="store_true")
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    npts, nmax = (14, 12) if args.fast else (41, 16)

    csvs, labels = [], []
    for ratio in RATIOS:
        dest = out / f"ratio_{ratio:g}"
        assert tmdl_main(["boundary", "--n-atoms", "3", "--g", "1e-6",
                          "--g2-ratio", str(ratio),
                          "--g-grid", f"0.3:1.3:{npts}", "--method", "pt",
                          "--n-max", str(nmax), "--output", str(dest)]) == 0
        csvs.append(dest / "boundary_pt.csv")
        labels.append(f"g2/g1 = {ratio:g}")
    render(out, csvs, labels)


def render(out, csvs, labels):
    try:
        from tmdl_plots import PlotSpec, render as render_fig
    except ImportError:
        return
    render_fig(PlotSpec("boundary-overlay", [str(p) for p in csvs],
                        str(out / "deviation_overlay.png"), labels=labels,
                        xlabel="g / omega"))
    print(out / "deviation_overlay.png")


if __name__ == "__main__":
    run()
