#!/usr/bin/env python3
"""Excitation staircases for N = 1, 3, 5, 7 plus the single-mode inset curve."""
import argparse
from pathlib import Path

from tmdl.cli import main as tmdl_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/staircases")
    ap.add_argument("--fast", action="store_true",
                    help="coarse grid and small cutoff")
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    npts, nmax = (51, 16) if args.fast else (201, 30)

    csvs = []
    for n_atoms in (1, 3, 5, 7):
        dest = out / f"n{n_atoms}"
        code = tmdl_main(["staircase", "--n-atoms", str(n_atoms),
                          "--sweep", f"g:0:2:{npts}", "--n-max", str(nmax),
                          "--output", str(dest)])
        assert code == 0, f"staircase N={n_atoms} failed"
        csvs.append(dest / "staircase.csv")
    inset = out / "dicke_inset"
    assert tmdl_main(["staircase", "--n-atoms", "3", "--model", "dicke",
                      "--sweep", f"g:0:2:{npts}", "--n-max", str(nmax),
                      "--output", str(inset)]) == 0
    render(out, csvs, inset / "staircase.csv")


def render(out, csvs, inset_csv):
    try:
        from tmdl_plots import PlotSpec, render as render_fig
    except ImportError:
        print("tmdl-plots not installed; CSVs written, skipping figures")
        return
    render_fig(PlotSpec("staircase", [str(p) for p in csvs],
                        str(out / "staircase_family.png"),
                        labels=[f"N={n}" for n in (1, 3, 5, 7)],
                        xlabel="g / omega"))
    render_fig(PlotSpec("staircase", [str(inset_csv)],
                        str(out / "dicke_inset.png"),
                        labels=["single mode, N=3"], xlabel="g / omega",
                        ylabel="n_s"))
    print(out / "staircase_family.png")


if __name__ == "__main__":
    run()
