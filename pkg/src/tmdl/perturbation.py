"""Closed-form phase boundary from second-order perturbation theory.

The ground energy expanded to second order in the order parameters is

    E2 = sum_m (z t + z^2 t^2 R_m) psi_m^2 + 2 z^2 t^2 T psi1 psi2,

with response coefficients built from the full single-site spectrum.
The critical hopping is where the smaller Hessian eigenvalue of E2 first
reaches zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (DegenerateGroundStateError, NoPositiveRootError,
                     SolverConvergenceError)
from .hilbert import DIM_CEILING, operator, h_single_site, space_for
from .params import ModelParams, sweep_replace
from .spectra import _realified

GAP_TOL = 1e-8          # relative to omega1: below this the ground state is degenerate
TAIL_REL = 1e-10


@dataclass(frozen=True)
class PtCoefficients:
    r1: float               # mode-1 second-order response (negative)
    r2: float
    t_cross: float          # cross response coupling psi1 psi2
    n_lobe: float           # excitation label of the unperturbed ground state
    gap0: float             # unperturbed gap above the ground state
    tail_rel: float         # relative size of the highest retained term

    def __post_init__(self):
        if not (self.r1 < 0 and self.r2 < 0):
            raise ValueError(f"response coefficients must be negative, "
                             f"got R1={self.r1}, R2={self.r2}")


def pt_coefficients(params: ModelParams, *, n_max: int | None = None,
                    ceiling: int = DIM_CEILING) -> PtCoefficients:
    """Second-order response of the single-site ground state to both modes.

    Sums run over the full truncated spectrum; the relative size of the
    highest retained term is checked so a too-small cutoff fails loudly
    instead of silently biasing the boundary.
    """
    space = space_for(params, n_max, ceiling=ceiling)
    h = h_single_site(space, params)
    evals, evecs = la.eigh(_realified(h.toarray()))
    gap0 = float(evals[1] - evals[0])
    if gap0 < GAP_TOL * params.omega1:
        raise DegenerateGroundStateError(
            f"ground gap {gap0:.3e} below {GAP_TOL} * omega; sitting on a lobe boundary"
        )
    v0 = evecs[:, 0]
    a1 = operator(space, "a1").matrix
    a2 = operator(space, "a2").matrix
    x1 = a1 + a1.getH()
    x2 = a2 + a2.getH()
    w1 = evecs.conj().T @ (x1 @ v0)     # <k| (a1 + a1') |0>
    w2 = evecs.conj().T @ (x2 @ v0)
    denom = evals[0] - evals
    denom[0] = np.inf                   # exclude k = 0
    terms1 = np.abs(w1) ** 2 / denom
    terms2 = np.abs(w2) ** 2 / denom
    terms_t = np.real(np.conj(w1) * w2) / denom
    r1 = float(terms1.sum())
    r2 = float(terms2.sum())
    scale = max(abs(r1), abs(r2))
    tail = max(abs(terms1[-1]), abs(terms2[-1]), abs(terms_t[-1])) / scale
    if tail > TAIL_REL:
        raise SolverConvergenceError(
            f"highest retained eigenstate still contributes {tail:.2e} "
            f"relative; increase the cutoff"
        )
    ne = operator(space, "N_e").matrix
    n_lobe = float(np.real(v0.conj() @ (ne @ v0)))
    return PtCoefficients(r1=r1, r2=r2, t_cross=float(terms_t.sum()),
                          n_lobe=n_lobe, gap0=gap0, tail_rel=float(tail))


def hessian(coeffs: PtCoefficients, z: int, t: float) -> np.ndarray:
    """Hessian of E2 with respect to (psi1, psi2)."""
    zt = z * t
    return np.array([
        [2.0 * (zt + zt ** 2 * coeffs.r1), 2.0 * zt ** 2 * coeffs.t_cross],
        [2.0 * zt ** 2 * coeffs.t_cross, 2.0 * (zt + zt ** 2 * coeffs.r2)],
    ])


def hessian_eigenvalues(coeffs: PtCoefficients, z: int, t: float) -> tuple[float, float]:
    zt = z * t
    s = coeffs.r1 + coeffs.r2
    d = np.sqrt((coeffs.r1 - coeffs.r2) ** 2 + 4.0 * coeffs.t_cross ** 2)
    return (2.0 * zt + zt ** 2 * (s - d), 2.0 * zt + zt ** 2 * (s + d))


def critical_t(coeffs: PtCoefficients, z: int) -> float:
    """Smallest positive hopping where a Hessian eigenvalue vanishes.

    Each eigenvalue 2 z t + (z t)^2 (S -+ D) has the nontrivial root
    t = -2 / (z (S -+ D)); the transition is the smaller positive one.
    """
    s = coeffs.r1 + coeffs.r2
    d = np.sqrt((coeffs.r1 - coeffs.r2) ** 2 + 4.0 * coeffs.t_cross ** 2)
    roots = [-2.0 / (z * branch) for branch in (s - d, s + d) if branch < 0.0]
    roots = [t for t in roots if t > 0.0]
    if not roots:
        raise NoPositiveRootError(
            f"no positive root: R1={coeffs.r1}, R2={coeffs.r2}, T={coeffs.t_cross}"
        )
    return min(roots)


@dataclass
class PhaseBoundary:
    g: np.ndarray
    t_c: np.ndarray
    zt_c: np.ndarray
    n_lobe: np.ndarray
    degenerate: np.ndarray       # True where the gap closed and t_c was set to 0
    z: int
    params: ModelParams

    def lobe_count(self) -> int:
        """Number of maximal runs of nonzero t_c along the sweep."""
        open_ = self.t_c > 0
        return int(np.sum(open_[1:] & ~open_[:-1]) + (1 if open_[0] else 0))


def boundary_curve(params: ModelParams, g_grid, *, n_max: int | None = None,
                   jump_positions=None, jump_window: float = 1e-6,
                   ceiling: int = DIM_CEILING) -> PhaseBoundary:
    """Critical hopping along a coupling sweep; pinches flagged t_c = 0.

    Points within `jump_window` of a known level crossing, or where the
    unperturbed gap closes, are recorded with t_c = 0: the expansion is
    invalid there and the physical boundary pinches to zero.
    """
    g_grid = np.asarray(g_grid, dtype=float)
    if np.any(np.diff(g_grid) <= 0):
        raise ValueError("g grid must be ascending")
    jump_positions = np.asarray(jump_positions if jump_positions is not None else [])
    t_c = np.zeros(len(g_grid))
    n_lobe = np.full(len(g_grid), np.nan)
    degenerate = np.zeros(len(g_grid), dtype=bool)
    for i, g in enumerate(g_grid):
        if jump_positions.size and np.min(np.abs(jump_positions - g)) < jump_window:
            degenerate[i] = True
            continue
        p = sweep_replace(params, "g", g)
        try:
            coeffs = pt_coefficients(p, n_max=n_max, ceiling=ceiling)
        except DegenerateGroundStateError:
            degenerate[i] = True
            continue
        t_c[i] = critical_t(coeffs, params.z)
        n_lobe[i] = coeffs.n_lobe
    return PhaseBoundary(g=g_grid, t_c=t_c, zt_c=params.z * t_c, n_lobe=n_lobe,
                         degenerate=degenerate, z=params.z, params=params)
