"""Command-line interface: one binary, one subcommand per pipeline.

Each run writes CSV payloads plus a metadata.json sidecar (resolved
config, cutoffs, code version, wall time, per-file row counts) into a
fresh timestamped directory unless --output forces one. Exit codes:
0 success, 2 config error, 3 numerical failure, 4 I/O failure; failures
also print a machine-readable error JSON to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import CircuitParams, composites, effective_params, tune_degenerate
from .config import (ALL_KEYS, model_params_from, parse_config_file,
                     parse_grid, parse_sweep, validate_config)
from .errors import ConfigError, TmdlError
from .meanfield import boundary_by_bisection
from .params import sweep_replace
from .perturbation import boundary_curve
from .phasescan import compare_boundaries, scan
from .spectra import low_lying_gap_profile, staircase
from .spinmap import lobe_pair_states, project_operators, xx_parameters
from .tables import emit_csv, emit_json

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="config file (JSON object or key=value lines)")
    p.add_argument("--output", help="force this output directory")
    p.add_argument("--workers", type=int, help="worker processes for grids")
    p.add_argument("--n-max", dest="n_max", type=int, help="Fock cutoff per mode")
    p.add_argument("--seed", type=int, help="seed (reserved, recorded only)")
    for flag, typ in [("--omega1", float), ("--omega2", float), ("--omega0", float),
                      ("--g", float), ("--g1", float), ("--g2", float),
                      ("--g2-ratio", float), ("--n-atoms", int), ("--mu", float),
                      ("--z", int), ("--t", float), ("--psi-epsilon", float)]:
        p.add_argument(flag, dest=flag[2:].replace("-", "_"), type=typ)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tmdl",
        description="Ground-state pipelines for the two-mode Dicke lattice",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("staircase", help="excitation density along a g or mu sweep")
    _add_common(p)
    p.add_argument("--sweep", help="var:start:stop:npoints (var = g | mu)")
    p.add_argument("--model", choices=["two_mode", "dicke"])

    p = sub.add_parser("boundary", help="critical hopping along a coupling sweep")
    _add_common(p)
    p.add_argument("--g-grid", dest="g_grid", help="start:stop:npoints")
    p.add_argument("--method", choices=["pt", "mf", "both"])
    p.add_argument("--t-hi", dest="t_hi", type=float,
                   help="upper bisection endpoint for the mean-field method")

    p = sub.add_parser("scan", help="classify a (t, g|mu) grid")
    _add_common(p)
    p.add_argument("--t-grid", dest="t_grid", help="start:stop:npoints")
    p.add_argument("--axis2", choices=["g", "mu"])
    p.add_argument("--axis2-grid", dest="axis2_grid", help="start:stop:npoints")
    p.add_argument("--method", choices=["meanfield", "perturbation", "both"])

    p = sub.add_parser("spinmap", help="effective spin parameters near a degeneracy")
    _add_common(p)

    p = sub.add_parser("circuit", help="circuit element values to site parameters")
    _add_common(p)
    for flag in ["--L1", "--L2", "--La", "--Lb", "--Ca", "--Cb", "--Cg", "--CJ",
                 "--D", "--xs", "--matrix-element", "--omega0-atom",
                 "--phi0", "--e-charge"]:
        p.add_argument(flag, dest=flag[2:].replace("-", "_"), type=float)
    p.add_argument("--dedup-lt-j", dest="dedup_lt_j", action="store_true",
                   default=None)
    p.add_argument("--tune-target-omega", dest="tune_target_omega", type=float)
    p.add_argument("--tune-target-g", dest="tune_target_g", type=float)
    p.add_argument("--tune-free", dest="tune_free",
                   help="comma-separated free element names")

    p = sub.add_parser("gapprofile", help="low-lying gaps along a coupling sweep")
    _add_common(p)
    p.add_argument("--g-grid", dest="g_grid", help="start:stop:npoints")
    p.add_argument("--k-levels", dest="k_levels", type=int)
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    data = parse_config_file(args.config) if args.config else {}
    overrides = {k: v for k, v in vars(args).items()
                 if k in ALL_KEYS and v is not None}
    data.update(overrides)
    return validate_config(data)


def _output_dir(config: dict, subcommand: str) -> Path:
    if config.get("output"):
        out = Path(config["output"])
        out.mkdir(parents=True, exist_ok=True)
        return out
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S-%f")
    out = Path("runs") / f"{subcommand}-{stamp}"
    out.mkdir(parents=True, exist_ok=False)
    return out


def _finish(outdir: Path, config: dict, infos, started: float, extra=None) -> int:
    meta = {
        "version": __version__,
        "config": {k: v for k, v in config.items()},
        "csv_files": [{"filename": i.filename, "rows": i.rows} for i in infos],
        "nan_cells": {i.filename: i.nan_cells for i in infos if i.nan_cells},
        "wall_time_s": time.monotonic() - started,
    }
    if extra:
        meta.update(extra)
    emit_json(meta, outdir / "metadata.json")
    print(outdir)
    return 0


def _run_staircase(config: dict, outdir: Path, started: float) -> int:
    if not config["sweep"]:
        raise ConfigError("staircase needs --sweep var:start:stop:npoints")
    variable, grid = parse_sweep(config["sweep"])
    params = model_params_from(config)
    curve = staircase(params, variable, grid, n_max=config["n_max"],
                      model=config["model"], jump_width=config["jump_width"],
                      ceiling=config["ceiling"])
    infos = [
        emit_csv([variable, "n", "jump_flag"],
                 zip(curve.grid, curve.n, curve.jump_flag),
                 outdir / "staircase.csv"),
        emit_csv(["position", "width", "n_below", "n_above"],
                 [(j.position, j.width, j.n_below, j.n_above)
                  for j in curve.jumps],
                 outdir / "jumps.csv"),
    ]
    return _finish(outdir, config, infos, started,
                   {"n_max_used": curve.n_max, "model": curve.model})


def _run_boundary(config: dict, outdir: Path, started: float) -> int:
    if not config["g_grid"]:
        raise ConfigError("boundary needs --g-grid start:stop:npoints")
    grid = parse_grid(config["g_grid"], name="g_grid")
    params = model_params_from(config)
    method = {"pt": "pt", "mf": "mf", "both": "both"}.get(config["method"], "pt")
    infos = []
    if method in ("pt", "both"):
        pb = boundary_curve(params, grid, n_max=config["n_max"],
                            ceiling=config["ceiling"])
        infos.append(emit_csv(
            ["g", "t_c", "zt_c", "n_lobe", "degenerate_flag"],
            zip(pb.g, pb.t_c, pb.zt_c, pb.n_lobe, pb.degenerate.astype(int)),
            outdir / "boundary_pt.csv"))
    if method in ("mf", "both"):
        t_hi = config.get("t_hi") or 1.05 * params.omega1 / params.z
        rows = []
        for g in grid:
            p_g = sweep_replace(params, "g", float(g))
            try:
                t_c = boundary_by_bisection(p_g, 1e-6, t_hi,
                                            n_max=config["n_max"],
                                            ceiling=config["ceiling"])
                rows.append((g, t_c, params.z * t_c))
            except TmdlError:
                rows.append((g, float("nan"), float("nan")))
        infos.append(emit_csv(["g", "t_c", "zt_c"], rows,
                              outdir / "boundary_mf.csv"))
    return _finish(outdir, config, infos, started)


def _run_scan(config: dict, outdir: Path, started: float) -> int:
    if not config["t_grid"] or not config["axis2_grid"]:
        raise ConfigError("scan needs --t-grid and --axis2-grid")
    t_grid = parse_grid(config["t_grid"], name="t_grid")
    a2_grid = parse_grid(config["axis2_grid"], name="axis2_grid")
    params = model_params_from(config)
    diagram = scan(params, t_grid, config["axis2"], a2_grid,
                   method=config["method"], n_max=config["n_max"],
                   psi_epsilon=config["psi_epsilon"],
                   coarse=config["coarse_grid"], workers=config["workers"],
                   ceiling=config["ceiling"])
    rows = []
    for j, v in enumerate(diagram.axis2_grid):
        for i, t in enumerate(diagram.t_grid):
            rows.append((t, v, diagram.phase[i, j], diagram.psi1[i, j],
                         diagram.psi2[i, j], diagram.n[i, j]))
    infos = [emit_csv(["t", config["axis2"], "phase", "psi1", "psi2", "n"],
                      rows, outdir / "scan_grid.csv")]
    extra = {"cell_errors": {f"{i},{j}": msg for (i, j), msg
                             in diagram.cell_errors.items()}}
    if diagram.pt_boundary is not None:
        pb = diagram.pt_boundary
        infos.append(emit_csv(
            [config["axis2"], "t_c", "zt_c", "n_lobe", "degenerate_flag"],
            zip(pb.g, pb.t_c, pb.zt_c, pb.n_lobe, pb.degenerate.astype(int)),
            outdir / "boundary_pt.csv"))
    if diagram.method == "both":
        cmp_ = compare_boundaries(diagram)
        infos.append(emit_csv(
            [config["axis2"], "t_mf", "t_pt", "rel_discrepancy", "boundary_hit"],
            zip(cmp_.axis2, cmp_.t_mf, cmp_.t_pt, cmp_.rel_discrepancy,
                cmp_.boundary_hit_columns.astype(int)),
            outdir / "comparison.csv"))
        extra["boundary_comparison"] = {"max_rel": cmp_.max_rel,
                                        "median_rel": cmp_.median_rel}
    return _finish(outdir, config, infos, started, extra)


def _run_spinmap(config: dict, outdir: Path, started: float) -> int:
    params = model_params_from(config)
    pair = lobe_pair_states(params, n_max=config["n_max"],
                            pair_gap_ratio=config["pair_gap_ratio"],
                            ceiling=config["ceiling"])
    alpha, beta, report = project_operators(pair)
    xx = xx_parameters(alpha, beta, pair.delta, params.t, n_lobe=pair.n_lobe)
    info = emit_csv(
        ["n_lobe", "delta", "alpha_re", "alpha_im", "beta_re", "beta_im",
         "t", "j_exchange", "selection_max_violation"],
        [(pair.n_lobe, pair.delta, alpha.real, alpha.imag, beta.real,
          beta.imag, params.t, xx.j_exchange, report.max_violation)],
        outdir / "spinmap.csv")
    return _finish(outdir, config, [info], started)


def _circuit_params_from(config: dict) -> CircuitParams:
    required = ["L1", "L2", "La", "Lb", "Ca", "Cb", "Cg", "CJ", "D", "xs",
                "matrix_element", "omega0_atom"]
    missing = [k for k in required if config.get(k) is None]
    if missing:
        raise ConfigError(f"circuit needs values for {', '.join(missing)}")
    kw = {}
    if config.get("phi0") is not None:
        kw["phi0"] = config["phi0"]
    if config.get("e_charge") is not None:
        kw["e_charge"] = config["e_charge"]
    return CircuitParams(
        L1=config["L1"], L2=config["L2"], La=config["La"], Lb=config["Lb"],
        Ca=config["Ca"], Cb=config["Cb"], Cg=config["Cg"], CJ=config["CJ"],
        D=config["D"], xs=config["xs"],
        matrix_element=config["matrix_element"],
        omega0=config["omega0_atom"], **kw)


def _run_circuit(config: dict, outdir: Path, started: float) -> int:
    circ = _circuit_params_from(config)
    dedup = bool(config.get("dedup_lt_j"))
    extra = {}
    if config.get("tune_free"):
        if not config.get("tune_target_omega") or not config.get("tune_target_g"):
            raise ConfigError("tuning needs tune_target_omega and tune_target_g")
        free = [s.strip() for s in str(config["tune_free"]).split(",") if s.strip()]
        result = tune_degenerate(circ, config["tune_target_omega"],
                                 config["tune_target_g"], free,
                                 dedup_lt_j=dedup)
        circ = result.circuit
        extra["tune"] = {"converged": result.converged, "message": result.message}
    eff = effective_params(circ, dedup_lt_j=dedup)
    comp = eff.composites
    info = emit_csv(
        ["omega1", "omega2", "g1", "g2",
         "c_sigma", "l_sigma", "lt_j", "lt_s", "lt_c", "e_q"],
        [(eff.omega1, eff.omega2, eff.g1, eff.g2,
          comp.c_sigma, comp.l_sigma, comp.lt_j, comp.lt_s, comp.lt_c,
          comp.e_q)],
        outdir / "circuit_effective.csv")
    return _finish(outdir, config, [info], started, extra)


def _run_gapprofile(config: dict, outdir: Path, started: float) -> int:
    if not config["g_grid"]:
        raise ConfigError("gapprofile needs --g-grid start:stop:npoints")
    grid = parse_grid(config["g_grid"], name="g_grid")
    params = model_params_from(config)
    prof = low_lying_gap_profile(params, grid, k=config["k_levels"],
                                 n_max=config["n_max"])
    info = emit_csv(["g", "gap1", "gap2", "n0", "n1"],
                    zip(prof.g, prof.gap1, prof.gap2, prof.n0, prof.n1),
                    outdir / "gap_profile.csv")
    return _finish(outdir, config, [info], started,
                   {"n_max_used": prof.n_max})


_RUNNERS = {
    "staircase": _run_staircase,
    "boundary": _run_boundary,
    "scan": _run_scan,
    "spinmap": _run_spinmap,
    "circuit": _run_circuit,
    "gapprofile": _run_gapprofile,
}


def _fail(exc: Exception, code: int) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc),
                         "exit_code": code}}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    started = time.monotonic()
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        return _fail(exc, EXIT_CONFIG)
    try:
        outdir = _output_dir(config, args.subcommand)
    except OSError as exc:
        return _fail(exc, EXIT_IO)
    try:
        return _RUNNERS[args.subcommand](config, outdir, started)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except (TmdlError, np.linalg.LinAlgError, ValueError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    except OSError as exc:
        return _fail(exc, EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
