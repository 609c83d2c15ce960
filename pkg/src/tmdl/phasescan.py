"""Phase-diagram assembly over (t, g) and (t, mu) grids."""
from __future__ import annotations

import platform
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import BoundaryHitError, DegenerateGroundStateError, TmdlError
from .hilbert import DIM_CEILING, space_for
from .meanfield import PSI_EPSILON, SiteWorkspace, minimize
from .params import ModelParams, sweep_replace
from .perturbation import PhaseBoundary, boundary_curve, critical_t, pt_coefficients
from .utils import parallel_map

PHASE_MI = "MI"
PHASE_SF = "SF"
PHASE_ERROR = "ERROR"


@dataclass
class PhaseDiagram:
    t_grid: np.ndarray
    axis2_name: str                  # "g" or "mu"
    axis2_grid: np.ndarray
    phase: np.ndarray                # (len(t), len(axis2)) of unicode labels
    psi1: np.ndarray
    psi2: np.ndarray
    n: np.ndarray
    boundary_hit: np.ndarray         # bool per cell
    cell_errors: dict[tuple[int, int], str]
    pt_boundary: PhaseBoundary | None
    mf_frontier: np.ndarray | None   # per axis2 column, nan when absent
    method: str
    provenance: dict = field(default_factory=dict)

    def mi_lobe_count(self) -> int:
        """Connected runs of columns whose first off-zero t row is MI."""
        has_mi = self.column_has_mi()
        return int(np.sum(has_mi[1:] & ~has_mi[:-1]) + (1 if has_mi[0] else 0))

    def column_has_mi(self) -> np.ndarray:
        """True per column when any t > 0 cell is MI."""
        tpos = self.t_grid > 0
        return np.array([
            bool(np.any(self.phase[tpos, j] == PHASE_MI))
            for j in range(len(self.axis2_grid))
        ])


AUDIT_STRIDE = 8     # cells between coarse-grid audits along a column


def _column_n_max(params: ModelParams) -> int:
    """Column-local Fock cutoff: displaced occupation plus a fixed margin.

    Scans evaluate thousands of cells, so columns carry the leanest cutoff
    their coupling needs instead of the conservative global default.
    """
    g = max(params.g1, params.g2)
    return int(np.ceil(params.n_atoms * (g / params.omega1) ** 2)) + 8


def _scan_column(args):
    (params, axis2_name, v, t_grid, n_max, psi_epsilon, coarse, ceiling) = args
    p_col = sweep_replace(params, axis2_name, v)
    phases = np.empty(len(t_grid), dtype="<U5")
    psi1 = np.zeros(len(t_grid))
    psi2 = np.zeros(len(t_grid))
    n = np.full(len(t_grid), np.nan)
    bhit = np.zeros(len(t_grid), dtype=bool)
    errors = {}
    n_max_col = n_max if n_max is not None else _column_n_max(p_col)
    ws = SiteWorkspace(p_col, space_for(p_col, n_max_col, ceiling=ceiling))
    psi_max_col = None
    warm = None
    prev_phase = None
    edge_hit = False
    for i, t in enumerate(t_grid):
        if edge_hit:
            # the order parameter grows monotonically with t, so once the
            # search box limits a cell every larger t in the column does too
            phases[i] = PHASE_ERROR
            bhit[i] = True
            errors[i] = "BoundaryHitError: skipped, box edge reached at smaller t"
            continue
        # the warm start from the neighbouring cell tracks the minimum along
        # the sweep; the full coarse grid re-audits the landscape at the
        # column start, after any phase change and periodically
        audit_pts = coarse if (i == 0 or prev_phase is None) else (
            13 if i % AUDIT_STRIDE == 0 else 5)
        try:
            sol = minimize(replace(p_col, t=float(t)), n_max=n_max_col,
                           coarse=audit_pts, psi_max=psi_max_col,
                           psi_epsilon=psi_epsilon, ceiling=ceiling,
                           workspace=ws, warm_start=warm)
            if audit_pts != coarse and sol.phase != prev_phase:
                sol = minimize(replace(p_col, t=float(t)), n_max=n_max_col,
                               coarse=coarse, psi_max=psi_max_col,
                               psi_epsilon=psi_epsilon,
                               ceiling=ceiling, workspace=ws, warm_start=warm)
            phases[i] = sol.phase
            psi1[i], psi2[i], n[i] = sol.psi1, sol.psi2, sol.n
            bhit[i] = sol.boundary_hit
            warm = (sol.psi1, sol.psi2)
            prev_phase = sol.phase
            if sol.n_max > n_max_col:
                # a retry grew the box and cutoff; the order parameter only
                # grows with t, so keep both from here on
                n_max_col = sol.n_max
                psi_max_col = sol.psi_max
                ws = SiteWorkspace(p_col, space_for(p_col, n_max_col,
                                                    ceiling=ceiling))
        except TmdlError as exc:           # record, never abort the scan
            phases[i] = PHASE_ERROR
            bhit[i] = isinstance(exc, BoundaryHitError)
            edge_hit = bhit[i]
            errors[i] = f"{type(exc).__name__}: {exc}"
            warm = None
            prev_phase = None
    return phases, psi1, psi2, n, bhit, errors


def scan(params: ModelParams, t_grid, axis2_name: str, axis2_grid, *,
         method: str = "both", n_max: int | None = None,
         psi_epsilon: float = PSI_EPSILON, coarse: int = 21,
         workers: int = 1, ceiling: int = DIM_CEILING) -> PhaseDiagram:
    """Classify a (t, g|mu) grid by mean-field minimization, with the
    perturbative boundary overlaid for comparison.

    Columns (fixed axis2 value) are independent and run on a worker pool;
    per-cell failures are recorded in `cell_errors` and leave an ERROR
    label rather than aborting the scan.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    axis2_grid = np.asarray(axis2_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0) or np.any(np.diff(axis2_grid) <= 0):
        raise ValueError("grids must be strictly ascending")
    if axis2_name not in ("g", "mu"):
        raise ValueError("axis2 must be 'g' or 'mu'")
    if method not in ("meanfield", "perturbation", "both"):
        raise ValueError(f"unknown method {method!r}")

    nt, n2 = len(t_grid), len(axis2_grid)
    phase = np.full((nt, n2), "", dtype="<U5")
    psi1 = np.zeros((nt, n2))
    psi2 = np.zeros((nt, n2))
    n = np.full((nt, n2), np.nan)
    bhit = np.zeros((nt, n2), dtype=bool)
    cell_errors: dict[tuple[int, int], str] = {}
    mf_frontier = None

    if method in ("meanfield", "both"):
        jobs = [(params, axis2_name, float(v), t_grid, n_max, psi_epsilon,
                 coarse, ceiling) for v in axis2_grid]
        for j, col in enumerate(parallel_map(_scan_column, jobs, workers=workers)):
            phases_j, p1_j, p2_j, n_j, b_j, errs = col
            phase[:, j] = phases_j
            psi1[:, j], psi2[:, j], n[:, j], bhit[:, j] = p1_j, p2_j, n_j, b_j
            for i, msg in errs.items():
                cell_errors[(i, j)] = msg
        mf_frontier = _frontier_from_grid(t_grid, phase)

    pt = None
    if method in ("perturbation", "both"):
        if axis2_name == "g":
            pt = boundary_curve(params, axis2_grid, n_max=n_max, ceiling=ceiling)
        else:
            pt = _mu_boundary(params, axis2_grid, n_max=n_max, ceiling=ceiling)

    space = space_for(sweep_replace(params, axis2_name, float(axis2_grid[-1])),
                      n_max=n_max, ceiling=ceiling)
    provenance = {
        "version": __version__,
        "python": platform.python_version(),
        "params": params.__dict__.copy(),
        "axis2": axis2_name,
        "method": method,
        "n_max": space.n_max1,
        "psi_epsilon": psi_epsilon,
        "coarse_grid": coarse,
        "workers": workers,
    }
    return PhaseDiagram(t_grid=t_grid, axis2_name=axis2_name,
                        axis2_grid=axis2_grid, phase=phase, psi1=psi1,
                        psi2=psi2, n=n, boundary_hit=bhit,
                        cell_errors=cell_errors, pt_boundary=pt,
                        mf_frontier=mf_frontier, method=method,
                        provenance=provenance)


def _mu_boundary(params, mu_grid, *, n_max, ceiling) -> PhaseBoundary:
    """Perturbative critical hopping along a chemical-potential sweep."""
    t_c = np.zeros(len(mu_grid))
    n_lobe = np.full(len(mu_grid), np.nan)
    degenerate = np.zeros(len(mu_grid), dtype=bool)
    for i, mu in enumerate(mu_grid):
        try:
            coeffs = pt_coefficients(replace(params, mu=float(mu)),
                                     n_max=n_max, ceiling=ceiling)
            t_c[i] = critical_t(coeffs, params.z)
            n_lobe[i] = coeffs.n_lobe
        except DegenerateGroundStateError:
            degenerate[i] = True
    return PhaseBoundary(g=np.asarray(mu_grid, dtype=float), t_c=t_c,
                         zt_c=params.z * t_c, n_lobe=n_lobe,
                         degenerate=degenerate, z=params.z, params=params)


def _frontier_from_grid(t_grid, phase) -> np.ndarray:
    """Per-column MI/SF frontier: midpoint between the last MI and first SF row."""
    out = np.full(phase.shape[1], np.nan)
    for j in range(phase.shape[1]):
        col = phase[:, j]
        sf = np.flatnonzero(col == PHASE_SF)
        if sf.size == 0 or sf[0] == 0:
            continue
        i = sf[0]
        if col[i - 1] == PHASE_MI:
            out[j] = 0.5 * (t_grid[i - 1] + t_grid[i])
    return out


@dataclass
class BoundaryComparison:
    axis2: np.ndarray
    t_mf: np.ndarray
    t_pt: np.ndarray
    rel_discrepancy: np.ndarray       # nan where either boundary is missing
    max_rel: float
    median_rel: float
    boundary_hit_columns: np.ndarray  # columns containing box-edge cells


def compare_boundaries(diagram: PhaseDiagram) -> BoundaryComparison:
    """Per-column relative discrepancy between the two boundary estimates."""
    if diagram.pt_boundary is None or diagram.mf_frontier is None:
        raise ValueError("comparison needs a method='both' scan")
    t_pt = diagram.pt_boundary.t_c.copy()
    t_mf = diagram.mf_frontier.copy()
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.abs(t_mf - t_pt) / np.where(t_pt > 0, t_pt, np.nan)
    finite = np.isfinite(rel)
    return BoundaryComparison(
        axis2=diagram.axis2_grid,
        t_mf=t_mf,
        t_pt=t_pt,
        rel_discrepancy=rel,
        max_rel=float(np.nanmax(rel)) if finite.any() else np.nan,
        median_rel=float(np.nanmedian(rel)) if finite.any() else np.nan,
        boundary_hit_columns=diagram.boundary_hit.any(axis=0),
    )
