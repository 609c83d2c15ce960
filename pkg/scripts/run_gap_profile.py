#!/usr/bin/env python3
"""Low-lying gaps and level labels of the single-atom site versus coupling."""
import argparse
from pathlib import Path

from tmdl.cli import main as tmdl_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/gap_profile")
    ap.add_argument("--fast", action="store_true")
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    npts, nmax = (21, 16) if args.fast else (81, 40)

    assert tmdl_main(["gapprofile", "--n-atoms", "1",
                      "--g-grid", f"0:2:{npts}", "--n-max", str(nmax),
                      "--output", str(out)]) == 0
    try:
        from tmdl_plots import PlotSpec, render as render_fig
    except ImportError:
        return
    render_fig(PlotSpec("gap-profile", [str(out / "gap_profile.csv")],
                        str(out / "gap_profile.png"), xlabel="g / omega"))
    print(out / "gap_profile.png")


if __name__ == "__main__":
    run()
