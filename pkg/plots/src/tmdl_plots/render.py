"""Figure rendering from the documented CSV schemas.

Four figure kinds cover the pipeline outputs:

    staircase        (g|mu, n, jump_flag) step plots, one or more CSVs
    phase-diagram    scan_grid.csv two-color map, optional boundary overlay
    boundary-overlay one curve per boundary CSV, distinct styles
    gap-profile      (g, gap1, gap2, n0, n1) low-lying gaps

Rendering never mutates inputs; with timestamps disabled (the default)
identical inputs produce byte-identical image files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

KINDS = ("staircase", "phase-diagram", "boundary-overlay", "gap-profile")

REQUIRED_COLUMNS = {
    "staircase": {"n", "jump_flag"},
    "phase-diagram": {"t", "phase", "psi1", "psi2", "n"},
    "boundary-overlay": {"t_c"},
    "gap-profile": {"g", "gap1", "gap2", "n0", "n1"},
}

_HASHSALT = "tmdl-plots"


@dataclass
class PlotSpec:
    kind: str
    csv_paths: list[str]
    output: str
    boundary_paths: list[str] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    xlabel: str | None = None
    ylabel: str | None = None
    title: str | None = None
    timestamps: bool = False


class SchemaError(ValueError):
    pass


def _load(path, kind) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = REQUIRED_COLUMNS[kind] - set(df.columns)
    if missing:
        raise SchemaError(
            f"{path}: missing columns {sorted(missing)} for kind {kind!r}"
        )
    return df


def _sweep_column(df: pd.DataFrame) -> str:
    for name in ("g", "mu"):
        if name in df.columns:
            return name
    raise SchemaError("expected a 'g' or 'mu' sweep column")


def _save(fig, spec: PlotSpec):
    path = Path(spec.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {}
    if not spec.timestamps:
        if path.suffix.lower() == ".svg":
            kwargs["metadata"] = {"Date": None}
        elif path.suffix.lower() == ".png":
            kwargs["metadata"] = {"Software": _HASHSALT}
    fig.savefig(path, dpi=150, **kwargs)
    plt.close(fig)
    return path


def _label(spec: PlotSpec, i: int, default: str) -> str:
    return spec.labels[i] if i < len(spec.labels) else default


def _render_staircase(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for i, path in enumerate(spec.csv_paths):
        df = _load(path, "staircase")
        x = df[_sweep_column(df)]
        ax.step(x, df["n"], where="post", lw=1.4,
                label=_label(spec, i, Path(path).stem))
        jumps = df[df["jump_flag"] == 1]
        if len(jumps):
            ax.plot(jumps[_sweep_column(df)], jumps["n"], "v", ms=5,
                    color=ax.lines[-1].get_color())
    ax.set_xlabel(spec.xlabel or _sweep_column(_load(spec.csv_paths[0],
                                                     "staircase")))
    ax.set_ylabel(spec.ylabel or "excitation density n")
    if len(spec.csv_paths) > 1 or spec.labels:
        ax.legend(frameon=False, fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec)


_PHASE_LEVELS = {"MI": 0.0, "SF": 1.0, "ERROR": np.nan}


def _render_phase_diagram(spec: PlotSpec):
    df = _load(spec.csv_paths[0], "phase-diagram")
    a2 = _sweep_column(df)
    t_vals = np.sort(df["t"].unique())
    a_vals = np.sort(df[a2].unique())
    grid = np.full((len(t_vals), len(a_vals)), np.nan)
    n_grid = np.full_like(grid, np.nan)
    ti = {v: i for i, v in enumerate(t_vals)}
    ai = {v: i for i, v in enumerate(a_vals)}
    for _, row in df.iterrows():
        grid[ti[row["t"]], ai[row[a2]]] = _PHASE_LEVELS.get(row["phase"], np.nan)
        n_grid[ti[row["t"]], ai[row[a2]]] = row["n"]

    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    cmap = matplotlib.colors.ListedColormap(["#dce8f5", "#e8975a"])
    ax.pcolormesh(a_vals, t_vals, grid, cmap=cmap, vmin=0, vmax=1,
                  shading="nearest")
    for i, bpath in enumerate(spec.boundary_paths):
        b = _load(bpath, "boundary-overlay")
        ax.plot(b[_sweep_column(b)], b["t_c"], "k-" if i == 0 else "--",
                lw=1.6, label=_label(spec, i, Path(bpath).stem))
    # annotate each Mott lobe with its constant density
    mi = df[df["phase"] == "MI"]
    if len(mi):
        for n_val, blob in mi.groupby(mi["n"].round(3)):
            ax.annotate(f"n={n_val:g}", (blob[a2].mean(), blob["t"].mean()),
                        ha="center", va="center", fontsize=8)
    ax.set_xlabel(spec.xlabel or a2)
    ax.set_ylabel(spec.ylabel or "t")
    if spec.boundary_paths:
        ax.legend(frameon=False, fontsize=8, loc="upper right")
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec)


def _render_boundary_overlay(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    styles = ["-", "--", "-.", ":"]
    for i, path in enumerate(spec.csv_paths):
        b = _load(path, "boundary-overlay")
        ax.plot(b[_sweep_column(b)], b["t_c"], styles[i % len(styles)],
                lw=1.5, label=_label(spec, i, Path(path).stem))
    ax.set_xlabel(spec.xlabel or "g")
    ax.set_ylabel(spec.ylabel or "critical hopping t_c")
    ax.legend(frameon=False, fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec)


def _render_gap_profile(spec: PlotSpec):
    df = _load(spec.csv_paths[0], "gap-profile")
    fig, (ax, ax2) = plt.subplots(
        2, 1, figsize=(5.2, 4.6), sharex=True,
        gridspec_kw={"height_ratios": [2.2, 1.0]})
    ax.semilogy(df["g"], df["gap1"], "-", lw=1.5, label="E1 - E0")
    ax.semilogy(df["g"], df["gap2"], "--", lw=1.5, label="E2 - E0")
    ax.set_ylabel(spec.ylabel or "gap")
    ax.legend(frameon=False, fontsize=8)
    ax2.plot(df["g"], df["n0"], "-", lw=1.2, label="n (ground)")
    ax2.plot(df["g"], df["n1"], "--", lw=1.2, label="n (first excited)")
    ax2.set_xlabel(spec.xlabel or "g")
    ax2.set_ylabel("n")
    ax2.legend(frameon=False, fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec)


_RENDERERS = {
    "staircase": _render_staircase,
    "phase-diagram": _render_phase_diagram,
    "boundary-overlay": _render_boundary_overlay,
    "gap-profile": _render_gap_profile,
}


def render(spec: PlotSpec) -> Path:
    """Render one figure; returns the written image path."""
    if spec.kind not in KINDS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}; expected {KINDS}")
    if not spec.csv_paths:
        raise SchemaError("need at least one input CSV")
    for path in spec.csv_paths:
        if not Path(path).exists():
            raise FileNotFoundError(path)
    with matplotlib.rc_context({"svg.hashsalt": _HASHSALT}):
        return _RENDERERS[spec.kind](spec)
