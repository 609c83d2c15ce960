"""Hermitian eigensolving, ground-state observables, staircases and gap profiles."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (CutoffError, JumpResolutionError, NonHermitianError,
                     SolverConvergenceError)
from .hilbert import (DIM_CEILING, HilbertSpace, OperatorMatrix, build_space,
                      h_dicke, h_single_site, operator, space_for)
from .params import ModelParams, sweep_replace

HERMITICITY_TOL = 1e-10
RESIDUAL_REL = 1e-9
DEGENERACY_TOL = 1e-10
DENSE_DIM_MAX = 160          # below this a dense solve beats Lanczos setup cost


@dataclass
class SpectrumResult:
    """Lowest-k eigenpairs with per-state expectation values."""

    eigenvalues: np.ndarray          # ascending, shape (k,)
    eigenvectors: np.ndarray         # shape (dim, k)
    expectations: dict[str, np.ndarray] = field(default_factory=dict)
    degenerate_ground: bool = False
    method: str = "dense"

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def _as_matrix(h) -> tuple[sp.spmatrix | np.ndarray, HilbertSpace | None]:
    if isinstance(h, OperatorMatrix):
        return h.matrix, h.space
    return h, None


def _hermiticity_defect(m) -> float:
    if sp.issparse(m):
        d = m - m.getH()
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())
    return float(np.abs(m - m.conj().T).max())


def _expectation(op, vecs: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ik,ik->k", vecs.conj(), op @ vecs))


def _gershgorin_lower_bound(csr: sp.csr_matrix) -> float:
    d = csr.diagonal().real
    ab = abs(csr.copy())
    ab.setdiag(0.0)
    radii = np.asarray(ab.sum(axis=1)).ravel()
    return float((d - radii).min())


def _realified(m):
    """Drop an exactly-zero imaginary part so LAPACK/ARPACK run in float64.

    The site Hamiltonians are real in the product basis: the only
    candidate-imaginary coupling multiplies the real antisymmetric
    (a2 - a2') by the purely imaginary J_y, which is real again.
    """
    if sp.issparse(m):
        if np.iscomplexobj(m.dtype.type(0)) and (m.nnz == 0 or
                                                 np.abs(m.data.imag).max() == 0.0):
            return m.real
        return m
    if np.iscomplexobj(m) and (m.size == 0 or np.abs(m.imag).max() == 0.0):
        return m.real
    return m


def eigs_lowest(h, k: int, *, v0: np.ndarray | None = None,
                compute_expectations: bool = True) -> SpectrumResult:
    """k smallest eigenpairs of a Hermitian operator.

    Accepts an OperatorMatrix (space-tagged; N_e and parity expectations are
    attached) or a bare dense/sparse matrix. Dense LAPACK below
    DENSE_DIM_MAX or when k is a large fraction of dim, Lanczos otherwise,
    with a deterministic starting vector so results are reproducible.
    Lanczos falls back to shift-invert (sigma below the Gershgorin bound)
    and then to a dense solve; cold starts on highly degenerate spectra
    need this chain.
    """
    m, space = _as_matrix(h)
    dim = m.shape[0]
    if not (1 <= k <= dim):
        raise ValueError(f"need 1 <= k <= dim, got k={k}, dim={dim}")
    scale = max(1.0, float(np.abs(m.data).max()) if sp.issparse(m) and m.nnz
                else (float(np.abs(m).max()) if not sp.issparse(m) else 0.0))
    if _hermiticity_defect(m) > HERMITICITY_TOL * scale:
        raise NonHermitianError("matrix fails hermiticity tolerance")
    m = _realified(m)

    use_dense = dim <= DENSE_DIM_MAX or k > dim // 3 or k >= dim - 1
    if use_dense:
        dense = m.toarray() if sp.issparse(m) else np.asarray(m)
        vals, vecs = la.eigh(dense, subset_by_index=[0, k - 1])
        method = "dense"
    else:
        csr = m.tocsr() if sp.issparse(m) else sp.csr_matrix(m)
        uniform = np.full(dim, 1.0 / np.sqrt(dim))
        if v0 is None:
            v0 = uniform
        else:
            # A converged eigenvector of a nearby matrix spans a collapsed
            # Krylov space and can silently track an excited branch across a
            # level crossing; mixing in a fixed spread vector restores
            # overlap with every competing sector.
            v0 = v0 + 0.1 * uniform
            v0 = v0 / np.linalg.norm(v0)
        if not np.iscomplexobj(csr.dtype.type(0)) and np.iscomplexobj(v0):
            re = np.real(v0)
            norm = np.linalg.norm(re)
            v0 = re / norm if norm > 1e-8 else uniform
        if k == 1:
            ncv = min(dim, 12 if dim <= 800 else (25 if dim <= 1500 else 40))
        else:
            ncv = min(dim, max(40, 4 * k + 1))
        vals = vecs = None
        try:
            vals, vecs = spla.eigsh(csr, k=k, which="SA", v0=v0, ncv=ncv,
                                    tol=1e-10, maxiter=300 + 2 * dim)
            method = "lanczos"
        except spla.ArpackNoConvergence:
            try:
                sigma = _gershgorin_lower_bound(csr) - 1.0
                vals, vecs = spla.eigsh(csr, k=k, sigma=sigma, which="LM",
                                        v0=v0, tol=1e-12)
                method = "shift-invert"
            except Exception:
                if dim > 12_000:
                    raise SolverConvergenceError(
                        f"Lanczos failed at dim={dim}, too large for dense fallback"
                    ) from None
                vals, vecs = la.eigh(csr.toarray(), subset_by_index=[0, k - 1])
                method = "dense-fallback"
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    # residual contract: |Hv - Ev| < RESIDUAL_REL * |H| (lower-bounded by max |eig|)
    norm_lb = max(scale, float(np.abs(vals).max()))
    resid = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
    if np.any(resid > RESIDUAL_REL * norm_lb):
        raise SolverConvergenceError(
            f"eigenpair residual {resid.max():.3e} exceeds {RESIDUAL_REL:.1e} * |H|"
        )

    result = SpectrumResult(
        eigenvalues=np.asarray(vals, dtype=float),
        eigenvectors=vecs,
        degenerate_ground=(k >= 2 and vals[1] - vals[0] < DEGENERACY_TOL * scale),
        method=method,
    )
    if compute_expectations and space is not None:
        ne = operator(space, "N_e").matrix
        par = operator(space, "parity_total").matrix
        result.expectations = {
            "n_e": _expectation(ne, vecs),
            "n_e_var": _expectation(ne @ ne, vecs) - _expectation(ne, vecs) ** 2,
            "parity": _expectation(par, vecs),
        }
    return result


class GroundExpectation(NamedTuple):
    value: float
    degenerate: bool


def ground_expectation(h, op, k: int = 2) -> GroundExpectation:
    """<psi0| O |psi0> with a degeneracy flag when the ground gap closes."""
    m, _ = _as_matrix(h)
    o, _ = _as_matrix(op)
    if m.shape != o.shape:
        raise ValueError("H and O dimensions differ")
    res = eigs_lowest(h, min(k, m.shape[0]), compute_expectations=False)
    v0 = res.ground_state
    return GroundExpectation(float(np.real(v0.conj() @ (o @ v0))),
                             res.degenerate_ground)


def rotate_degenerate_to_label(evals: np.ndarray, vecs: np.ndarray,
                               label_op, cluster_tol: float) -> np.ndarray:
    """Diagonalize `label_op` inside each near-degenerate energy cluster.

    Degenerate eigenvectors come out of the solver in arbitrary mixtures;
    when the label operator commutes with H the rotated vectors carry sharp
    labels. Returns a new eigenvector array, energies unchanged.
    """
    out = vecs.copy()
    k = len(evals)
    i = 0
    while i < k:
        j = i + 1
        while j < k and evals[j] - evals[j - 1] < cluster_tol:
            j += 1
        if j - i > 1:
            block = out[:, i:j]
            small = block.conj().T @ (label_op @ block)
            small = 0.5 * (small + small.conj().T)
            _, rot = la.eigh(small)
            rotated = block @ rot
            out[:, i:j] = np.real(rotated) if not np.iscomplexobj(out) else rotated
        i = j
    return out


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Largest-magnitude amplitude made real positive (deterministic gauge)."""
    imax = int(np.argmax(np.abs(vec)))
    amp = vec[imax]
    if np.abs(amp) == 0.0:
        return vec
    return vec * (np.conj(amp) / np.abs(amp))


# ---------------------------------------------------------------------------
# staircases

@dataclass
class Jump:
    position: float          # bisected sweep-variable value (interval midpoint)
    width: float
    label_below: int
    label_above: int
    n_below: float
    n_above: float


@dataclass
class StaircaseCurve:
    variable: str
    grid: np.ndarray
    n: np.ndarray                 # mean excitation density per grid point
    n_variance: np.ndarray        # variance of the excitation number
    labels: np.ndarray            # integer sector labels (two-mode model only)
    quantized: np.ndarray         # variance below the quantization guard
    jump_flag: np.ndarray         # 1 on first grid point after a localized jump
    jumps: list[Jump]
    model: str
    params: ModelParams
    n_max: int

    def plateau_values(self) -> np.ndarray:
        """Distinct excitation values over the quantized plateaus, in order."""
        vals = []
        for lab, q in zip(self.labels, self.quantized):
            if q and (not vals or vals[-1] != lab):
                vals.append(lab)
        return np.array(vals) - self.params.n_atoms / 2.0


# Above this excitation-number variance the ground state is not label-pure.
# Deep ultrastrong coupling melts the labels at fixed cutoff: inter-sector
# splittings shrink exponentially while truncation mixes sectors, so there
# is a coupling beyond which the staircase is numerically unresolvable.
QUANTIZATION_GUARD = 1e-3


def _lowest_pair_span(m, v_prev=None):
    """Orthonormal basis of the two lowest states, cluster-tolerant.

    Krylov solvers grind when the low end of the spectrum is a
    quasi-degenerate cluster: resolving eigenvalues within the cluster is
    ill-conditioned and irrelevant here, since the label rotation only
    needs the converged span. Block LOBPCG converges that span on the
    residual of the block while being indifferent to the splitting inside.
    `v_prev` may be one warm vector or a two-column block (e.g. the states
    bracketing a level crossing, which pins both competing sectors).
    """
    dim = m.shape[0]
    if dim <= DENSE_DIM_MAX:
        vals, vecs = la.eigh(m.toarray() if sp.issparse(m) else m,
                             subset_by_index=[0, 1])
        return vals, vecs
    spread = np.stack([np.full(dim, 1.0 / np.sqrt(dim)),
                       np.cos(np.arange(dim) * 0.37) / np.sqrt(dim / 2)],
                      axis=1)
    if v_prev is None:
        x = spread
    elif v_prev.ndim == 2:
        x = v_prev + 1e-3 * spread
    else:
        x = np.column_stack([v_prev, spread[:, 1]])
    x = np.linalg.qr(np.real(x))[0]
    import warnings

    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vals, vecs = spla.lobpcg(m, x, tol=1e-9, maxiter=500, largest=False)
    # Rayleigh-Ritz cleanup on the returned span
    q = np.linalg.qr(vecs)[0]
    small = q.conj().T @ (m @ q)
    small = 0.5 * (small + small.conj().T)
    sv, sw = la.eigh(small)
    return sv, q @ sw


def _ground_label_state(params: ModelParams, space: HilbertSpace, ne,
                        v0=None, model: str = "two_mode"):
    """Ground excitation value/variance plus the low pair for warm starts."""
    if model == "dicke":
        h = h_dicke(space, params)
        obs = operator(space, "N_s").matrix
    else:
        h = h_single_site(space, params)
        obs = ne
    vals, vecs = _lowest_pair_span(_realified(h.matrix), v_prev=v0)
    if model == "two_mode":
        vecs = rotate_degenerate_to_label(vals, vecs, obs,
                                          cluster_tol=1e-6 * params.omega1)
        # order the rotated pair by energy expectation
        e_rot = np.real(np.einsum("ik,ik->k", vecs.conj(), h.matrix @ vecs))
        vecs = vecs[:, np.argsort(e_rot)]
    v = vecs[:, 0]
    n_val = float(np.real(v.conj() @ (obs @ v)))
    n_var = float(np.real(v.conj() @ (obs @ (obs @ v)))) - n_val ** 2
    return n_val, n_var, np.real(vecs)


def _label_int(n_val: float, n_atoms: int) -> int:
    """Integer sector index of an excitation value n = -N/2 + k."""
    return int(round(n_val + n_atoms / 2.0))


def staircase(params: ModelParams, variable: str, grid, *,
              n_max: int | None = None, model: str = "two_mode",
              jump_width: float = 1e-4, localize: bool = True,
              quantization_guard: float = QUANTIZATION_GUARD,
              ceiling: int = DIM_CEILING) -> StaircaseCurve:
    """Ground-state excitation density along a sweep, with localized jumps.

    Jumps are detected on the integer sector label of the ground state and
    bisected to `jump_width`; each localized jump must change the label by
    exactly one. Localization only runs between label-pure grid points
    (see QUANTIZATION_GUARD). The single-mode Dicke comparison curve
    (`model="dicke"`) has no conserved label, so localization is skipped.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("sweep grid must be ascending with >= 2 points")
    if model not in ("two_mode", "dicke"):
        raise ValueError(f"unknown model {model!r}")
    space = space_for(sweep_replace(params, variable, grid[-1]),
                      n_max=n_max, ceiling=ceiling)
    ne = operator(space, "N_e").matrix

    n_vals = np.empty(len(grid))
    n_vars = np.empty(len(grid))
    grounds = []
    pair = None
    for i, x in enumerate(grid):
        p = sweep_replace(params, variable, x)
        n_vals[i], n_vars[i], pair = _ground_label_state(p, space, ne,
                                                         v0=pair, model=model)
        grounds.append(pair[:, 0])

    quantized = n_vars < quantization_guard
    jump_flag = np.zeros(len(grid), dtype=int)
    jumps: list[Jump] = []
    if model == "two_mode":
        labels = np.array([_label_int(v, params.n_atoms) for v in n_vals])
        if localize:
            for i in range(1, len(grid)):
                if labels[i] != labels[i - 1] and quantized[i] and quantized[i - 1]:
                    jump_flag[i] = 1
                    jumps.extend(_bisect_jumps(params, variable, space, ne,
                                               grid[i - 1], grid[i],
                                               labels[i - 1], labels[i],
                                               n_vals[i - 1], n_vals[i],
                                               grounds[i - 1], grounds[i],
                                               jump_width))
    else:
        labels = np.zeros(len(grid), dtype=int)
    return StaircaseCurve(variable=variable, grid=grid, n=n_vals,
                          n_variance=n_vars, labels=labels, quantized=quantized,
                          jump_flag=jump_flag, jumps=jumps, model=model,
                          params=params, n_max=space.n_max1)


def _bisect_jumps(params, variable, space, ne, lo, hi, lab_lo, lab_hi,
                  n_lo, n_hi, v_lo, v_hi, width, depth: int = 0) -> list[Jump]:
    """Isolate each unit label change in (lo, hi) by bisection on the label.

    Midpoint solves start from the block of both bracketing ground states,
    so the two competing sectors are always represented in the search
    space and the label ordering near the crossing stays exact.
    """
    if lab_hi == lab_lo:
        return []
    bracket = np.column_stack([v_lo, v_hi])
    if abs(lab_hi - lab_lo) == 1:
        a, b, na, nb = lo, hi, n_lo, n_hi
        va, vb = v_lo, v_hi
        while b - a > width:
            mid = 0.5 * (a + b)
            n_mid, _, pair = _ground_label_state(
                sweep_replace(params, variable, mid), space, ne,
                v0=np.column_stack([va, vb]))
            if _label_int(n_mid, params.n_atoms) == lab_lo:
                a, na, va = mid, n_mid, pair[:, 0]
            else:
                b, nb, vb = mid, n_mid, pair[:, 0]
        return [Jump(position=0.5 * (a + b), width=b - a,
                     label_below=lab_lo, label_above=lab_hi,
                     n_below=na, n_above=nb)]
    # more than one crossing inside the interval: split and recurse
    if depth > 40 or hi - lo < 1e-9:
        raise JumpResolutionError(
            f"label changes by {lab_hi - lab_lo} across [{lo}, {hi}]; "
            "cannot isolate unit jumps"
        )
    mid = 0.5 * (lo + hi)
    n_mid, _, pair = _ground_label_state(sweep_replace(params, variable, mid),
                                         space, ne, v0=bracket)
    lab_mid = _label_int(n_mid, params.n_atoms)
    v_mid = pair[:, 0]
    return (_bisect_jumps(params, variable, space, ne, lo, mid, lab_lo, lab_mid,
                          n_lo, n_mid, v_lo, v_mid, width, depth + 1)
            + _bisect_jumps(params, variable, space, ne, mid, hi, lab_mid, lab_hi,
                            n_mid, n_hi, v_mid, v_hi, width, depth + 1))


# ---------------------------------------------------------------------------
# low-lying spectra

@dataclass
class GapProfile:
    g: np.ndarray
    gap1: np.ndarray        # E1 - E0
    gap2: np.ndarray        # E2 - E0
    n0: np.ndarray          # <N_e> in the ground state
    n1: np.ndarray          # <N_e> in the first excited state
    params: ModelParams
    n_max: int


def low_lying_gap_profile(params: ModelParams, g_grid, *, k: int = 3,
                          n_max: int | None = None) -> GapProfile:
    """Lowest gaps and per-level excitation numbers along a coupling sweep."""
    g_grid = np.asarray(g_grid, dtype=float)
    space = space_for(sweep_replace(params, "g", g_grid[-1]), n_max=n_max)
    ne = operator(space, "N_e").matrix
    gap1 = np.empty(len(g_grid))
    gap2 = np.empty(len(g_grid))
    n0 = np.empty(len(g_grid))
    n1 = np.empty(len(g_grid))
    v0 = None
    for i, g in enumerate(g_grid):
        p = sweep_replace(params, "g", g)
        h = h_single_site(space, p)
        res = eigs_lowest(h, k=min(k, space.dim), v0=v0, compute_expectations=False)
        vecs = rotate_degenerate_to_label(res.eigenvalues, res.eigenvectors, ne,
                                          cluster_tol=1e-10 * params.omega1)
        gap1[i] = res.eigenvalues[1] - res.eigenvalues[0]
        gap2[i] = res.eigenvalues[2] - res.eigenvalues[0] if k >= 3 else np.nan
        n0[i] = np.real(vecs[:, 0].conj() @ (ne @ vecs[:, 0]))
        n1[i] = np.real(vecs[:, 1].conj() @ (ne @ vecs[:, 1]))
        v0 = vecs[:, 0]
    return GapProfile(g=g_grid, gap1=gap1, gap2=gap2, n0=n0, n1=n1,
                      params=params, n_max=space.n_max1)


# ---------------------------------------------------------------------------
# cutoff convergence

def cutoff_converged(params: ModelParams,
                     observable: Callable[[ModelParams, HilbertSpace], float],
                     *, rel_tol: float = 1e-8, start: int = 0,
                     ceiling: int = DIM_CEILING) -> tuple[float, int]:
    """Double the Fock cutoffs until `observable` stabilizes to rel_tol.

    Returns (converged value, first cutoff of the agreeing pair).
    """
    n = start
    space = build_space(params.n_atoms, n, n, ceiling=ceiling)
    prev = observable(params, space)
    while True:
        n_next = max(1, 2 * n)
        try:
            space = build_space(params.n_atoms, n_next, n_next, ceiling=ceiling)
        except CutoffError as exc:
            raise CutoffError(
                f"observable not converged to {rel_tol} before ceiling: {exc}"
            ) from exc
        cur = observable(params, space)
        if abs(cur - prev) <= rel_tol * max(abs(cur), abs(prev), 1e-12):
            return cur, n
        prev, n = cur, n_next
