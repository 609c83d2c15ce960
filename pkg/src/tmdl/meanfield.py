"""Self-consistent minimization of the decoupled ground energy E(psi1, psi2)."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize as opt
import scipy.sparse as sp

from .errors import BisectionRangeError, BoundaryHitError
from .hilbert import DIM_CEILING, HilbertSpace, operator, h_single_site, space_for
from .params import ModelParams
from .spectra import _realified, eigs_lowest

PSI_EPSILON = 1e-4           # below this max|psi| the solution is labelled MI
COARSE_GRID = 21
REFINE_XATOL = 1e-7


@dataclass
class MeanFieldSolution:
    psi1: float
    psi2: float
    energy: float
    phase: str                   # "MI" | "SF"
    n: float                     # <N_e> in the optimal ground state
    n_variance: float
    iterations: int
    boundary_hit: bool
    psi_max: float
    n_max: int

    @property
    def psi_abs(self) -> float:
        return max(abs(self.psi1), abs(self.psi2))


class SiteWorkspace:
    """Cached operators for repeated mean-field energy evaluations.

    Holds only the hopping-independent pieces, so one workspace serves a
    whole sweep over t. The assembled Hamiltonian is a cheap sparse sum
    and consecutive evaluations reuse the previous ground vector as the
    Lanczos start, so an energy call costs a few matvecs.
    """

    def __init__(self, params: ModelParams, space: HilbertSpace):
        self.params_site = replace(params, t=0.0)
        self.space = space
        # the site Hamiltonian and both quadratures are real in this basis;
        # realifying once keeps every Lanczos call in float64
        self.h0 = _realified(h_single_site(space, params).matrix.tocsr())
        a1 = operator(space, "a1").matrix
        a2 = operator(space, "a2").matrix
        self.x1 = _realified((a1 + a1.getH()).tocsr())
        self.x2 = _realified((a2 + a2.getH()).tocsr())
        dtype = self.h0.dtype
        self.eye = sp.identity(space.dim, dtype=dtype, format="csr")
        self.ne = operator(space, "N_e").matrix
        self._v0 = None
        self.evaluations = 0

    def compatible(self, params: ModelParams) -> bool:
        return replace(params, t=0.0) == self.params_site

    def h_mf(self, zt: float, psi1: float, psi2: float) -> sp.csr_matrix:
        if zt == 0.0:
            return self.h0
        return (self.h0 - (zt * psi1) * self.x1 - (zt * psi2) * self.x2
                + (zt * (psi1 ** 2 + psi2 ** 2)) * self.eye).tocsr()

    def energy(self, zt: float, psi1: float, psi2: float) -> float:
        res = eigs_lowest(self.h_mf(zt, psi1, psi2), 1, v0=self._v0,
                          compute_expectations=False)
        self._v0 = res.ground_state
        self.evaluations += 1
        return res.ground_energy

    def energy_grad(self, zt: float, psi1: float, psi2: float):
        """Energy and its exact gradient (only the explicit psi dependence
        contributes; the ground state is variational)."""
        res = eigs_lowest(self.h_mf(zt, psi1, psi2), 1, v0=self._v0,
                          compute_expectations=False)
        self._v0 = res.ground_state
        self.evaluations += 1
        v = res.ground_state
        x1 = float(np.real(v.conj() @ (self.x1 @ v)))
        x2 = float(np.real(v.conj() @ (self.x2 @ v)))
        grad = np.array([-zt * x1 + 2.0 * zt * psi1,
                         -zt * x2 + 2.0 * zt * psi2])
        return res.ground_energy, grad

    def ground_observables(self, zt: float, psi1: float, psi2: float):
        res = eigs_lowest(self.h_mf(zt, psi1, psi2), 1, v0=self._v0,
                          compute_expectations=False)
        v = res.ground_state
        n = float(np.real(v.conj() @ (self.ne @ v)))
        n2 = float(np.real(v.conj() @ (self.ne @ (self.ne @ v))))
        return res.ground_energy, n, n2 - n * n


def energy_at(params: ModelParams, psi1: float, psi2: float, *,
              n_max: int | None = None, workspace: SiteWorkspace | None = None,
              ceiling: int = DIM_CEILING) -> float:
    """Ground energy of the decoupled Hamiltonian at fixed real (psi1, psi2)."""
    if workspace is None:
        workspace = SiteWorkspace(params, space_for(params, n_max, ceiling=ceiling))
    return workspace.energy(params.z * params.t, psi1, psi2)


def band_unstable(params: ModelParams) -> bool:
    """Hopping at or beyond the free-photon band edge.

    Shifting the quadrature of mode 2 that the atoms do not couple to
    gives E(0, psi2) = E(0, 0) + (z t - (z t)^2 / omega2) psi2^2 exactly,
    so for z t >= omega2 the decoupled energy is unbounded below and no
    finite order parameter exists. Mode 1 destabilizes no later than
    z t = omega1.
    """
    return params.z * params.t >= min(params.omega1, params.omega2)


def _coarse_scan(ws: SiteWorkspace, zt: float, psi_max: float, npts: int):
    """Grid minimum using the exact E(psi) = E(-psi) symmetry to halve work."""
    axis = np.linspace(-psi_max, psi_max, npts)
    energies = np.full((npts, npts), np.nan)
    half = npts // 2
    for i in range(half, npts):            # psi1 >= 0
        for j in range(npts):
            if i == half and j < half:     # psi1 == 0: keep psi2 >= 0 only
                continue
            e = ws.energy(zt, axis[i], axis[j])
            energies[i, j] = e
            energies[npts - 1 - i, npts - 1 - j] = e
    emin = np.nanmin(energies)
    # tie-break toward the smallest |psi| so t = 0 lands exactly on (0, 0)
    close = np.argwhere(energies <= emin + 1e-12 * max(1.0, abs(emin)))
    r2 = [axis[i] ** 2 + axis[j] ** 2 for i, j in close]
    i, j = close[int(np.argmin(r2))]
    return float(axis[i]), float(axis[j]), float(energies[i, j])


_RAY_DIRECTIONS = ((1.0, 0.0), (0.0, 1.0),
                   (np.sqrt(0.5), np.sqrt(0.5)), (np.sqrt(0.5), -np.sqrt(0.5)))


def _ray_scan(ws: SiteWorkspace, zt: float, psi_max: float, e00: float,
              psi_epsilon: float):
    """Best point over logarithmic rays along the candidate soft directions.

    The soft mode sits on a mode axis when the cross response vanishes and
    on a diagonal when the modes are degenerate in response; geometric
    amplitudes resolve the shallow valley just above the transition, which
    a uniform coarse grid cannot see. E(psi) = E(-psi), so positive
    amplitudes suffice.
    """
    amps = np.geomspace(10 * psi_epsilon, 0.9 * psi_max, 8)
    best = (0.0, 0.0, e00)
    for dx, dy in _RAY_DIRECTIONS:
        for a in amps:
            e = ws.energy(zt, a * dx, a * dy)
            if e < best[2]:
                best = (a * dx, a * dy, e)
    return best


def _refine(ws, zt, x0, psi_max, xatol, psi_epsilon=PSI_EPSILON):
    """Gradient descent from x0, with a short simplex polish when needed.

    The analytic gradient makes L-BFGS-B converge in tens of evaluations.
    The simplex polish guards against the gradient kinks that appear where
    two ground-state sectors cross; it only runs when the gradient search
    did not certify convergence or when the result sits near the MI/SF
    labelling threshold, where placement accuracy matters most.
    """
    x0 = np.clip(np.asarray(x0, dtype=float), -psi_max, psi_max)
    bounds = [(-psi_max, psi_max)] * 2
    res = opt.minimize(lambda x: ws.energy_grad(zt, x[0], x[1]), x0=x0,
                       jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"ftol": 1e-13, "gtol": 1e-9, "maxiter": 200})
    near_label_edge = np.abs(res.x).max() < 30 * psi_epsilon
    if res.success and not near_label_edge:
        return res
    polish = opt.minimize(lambda x: ws.energy(zt, x[0], x[1]), x0=res.x,
                          method="Nelder-Mead", bounds=bounds,
                          options={"xatol": xatol, "fatol": 1e-12,
                                   "maxiter": 50, "maxfev": 50})
    return polish if polish.fun <= res.fun else res


def minimize(params: ModelParams, *, n_max: int | None = None,
             psi_max: float | None = None, coarse: int = COARSE_GRID,
             psi_epsilon: float = PSI_EPSILON, xatol: float = REFINE_XATOL,
             workspace: SiteWorkspace | None = None,
             warm_start: tuple[float, float] | None = None,
             ceiling: int = DIM_CEILING, _retry: bool = True) -> MeanFieldSolution:
    """Global minimum of E(psi1, psi2) over the real box, with phase label.

    Coarse grid scan followed by bounded Nelder-Mead refinement; extra
    restarts probe the shallow valley that opens just above the critical
    hopping, where the grid resolution would miss it. A `warm_start`
    optimum from a neighbouring parameter point is refined as an
    additional candidate. If the minimum lands on the box edge the search
    is retried once with a larger box and cutoff, then fails hard.
    """
    if band_unstable(params):
        raise BoundaryHitError(
            f"z*t = {params.z * params.t:g} at or beyond the free-photon band "
            f"edge min(omega1, omega2) = {min(params.omega1, params.omega2):g}; "
            "the decoupled energy is unbounded below"
        )
    if workspace is not None and workspace.compatible(params):
        space = workspace.space
        ws = workspace
    else:
        space = space_for(params, n_max, ceiling=ceiling)
        ws = SiteWorkspace(params, space)
    if psi_max is None:
        psi_max = np.sqrt(space.n_max1) / 2.0
    zt = params.z * params.t

    e00 = ws.energy(zt, 0.0, 0.0)
    best = (0.0, 0.0, e00)
    iterations = 0
    if zt > 0.0:
        best = _ray_scan(ws, zt, psi_max, e00, psi_epsilon)
        if coarse >= 7:
            grid_best = _coarse_scan(ws, zt, psi_max, coarse)
            if grid_best[2] < best[2]:
                best = grid_best
        starts = []
        if best[2] < e00:
            starts.append(best[:2])
        if warm_start is not None and any(warm_start):
            starts.append(warm_start)
        for x0 in starts:
            res = _refine(ws, zt, x0, psi_max, xatol, psi_epsilon)
            iterations += res.nit
            if res.fun < best[2]:
                best = (float(res.x[0]), float(res.x[1]), float(res.fun))

    psi1, psi2, energy = best
    if energy > e00:
        psi1, psi2, energy = 0.0, 0.0, e00    # minimizer never beats the MI candidate

    if max(abs(psi1), abs(psi2)) > 0.98 * psi_max:
        if _retry:
            return minimize(params, n_max=int(np.ceil(1.5 * space.n_max1)),
                            psi_max=2.0 * psi_max, coarse=5,
                            psi_epsilon=psi_epsilon, xatol=xatol,
                            warm_start=(psi1, psi2),
                            ceiling=ceiling, _retry=False)
        raise BoundaryHitError(
            f"minimum at |psi|={max(abs(psi1), abs(psi2)):.3f} on the box edge "
            f"(psi_max={psi_max:.3f}) after retry"
        )

    phase = "MI" if max(abs(psi1), abs(psi2)) < psi_epsilon else "SF"
    if phase == "MI":
        psi1 = psi2 = 0.0
    energy, n, n_var = ws.ground_observables(zt, psi1, psi2)
    return MeanFieldSolution(psi1=psi1, psi2=psi2, energy=energy, phase=phase,
                             n=n, n_variance=n_var, iterations=iterations,
                             boundary_hit=False, psi_max=psi_max,
                             n_max=space.n_max1)


def boundary_by_bisection(params: ModelParams, t_lo: float, t_hi: float, *,
                          n_max: int | None = None, width: float | None = None,
                          ceiling: int = DIM_CEILING, **kw) -> float:
    """Critical hopping from bisection on the MI/SF label.

    The endpoints must straddle the transition; the label is bisected to
    width 1e-4 * omega / z by default.
    """
    if width is None:
        width = 1e-4 * params.omega1 / params.z
    space = space_for(replace(params, t=t_hi), n_max, ceiling=ceiling)
    ws = SiteWorkspace(params, space)
    # near the transition the onset probes carry the label; the coarse grid
    # adds nothing at the resolution that matters here
    kw.setdefault("coarse", 5)

    def phase_at(t):
        # a search box overflowed after retry means an unbounded decoupled
        # energy: the symmetry-broken side of the transition
        try:
            return minimize(replace(params, t=t), workspace=ws, **kw).phase
        except BoundaryHitError:
            return "SF"

    phase_lo, phase_hi = phase_at(t_lo), phase_at(t_hi)
    if phase_lo == phase_hi:
        raise BisectionRangeError(
            f"both endpoints are {phase_lo}; t-range does not bracket the transition"
        )
    if phase_lo != "MI":
        raise BisectionRangeError("lower endpoint must be MI")
    while t_hi - t_lo > width:
        mid = 0.5 * (t_lo + t_hi)
        if phase_at(mid) == "MI":
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)
