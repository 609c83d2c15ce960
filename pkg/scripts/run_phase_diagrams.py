#!/usr/bin/env python3
"""Mott-lobe diagrams: (t, g) for N = 1 and N = 3, and (t, mu) for N = 1."""
import argparse
from pathlib import Path

from tmdl.cli import main as tmdl_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/phase_diagrams")
    ap.add_argument("--fast", action="store_true")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    npts = 20 if args.fast else 60
    w = str(args.workers)

    jobs = {
        "tg_n1": ["scan", "--n-atoms", "1", "--g", "0",
                  "--t-grid", f"0:0.6:{npts}", "--axis2", "g",
                  "--axis2-grid", f"0:2:{npts}"],
        "tg_n3": ["scan", "--n-atoms", "3", "--g", "0",
                  "--t-grid", f"0:0.6:{npts}", "--axis2", "g",
                  "--axis2-grid", f"0:2:{npts}"],
        "tmu_n1": ["scan", "--n-atoms", "1", "--g", "1",
                   "--t-grid", f"0:0.5:{npts}", "--axis2", "mu",
                   "--axis2-grid", f"0:1:{npts}"],
    }
    for name, argv_job in jobs.items():
        dest = out / name
        assert tmdl_main(argv_job + ["--method", "both", "--workers", w,
                                     "--output", str(dest)]) == 0, name
        render(dest, name)


def render(dest, name):
    try:
        from tmdl_plots import PlotSpec, render as render_fig
    except ImportError:
        return
    render_fig(PlotSpec("phase-diagram", [str(dest / "scan_grid.csv")],
                        str(dest / f"{name}.png"),
                        boundary_paths=[str(dest / "boundary_pt.csv")]))
    print(dest / f"{name}.png")


if __name__ == "__main__":
    run()
