"""Closed-form mapping from circuit element values to two-mode Rabi parameters.

Two superconducting stripline resonators (inductance/capacitance per mode
La/Ca and Lb/Cb, length D) couple to a Josephson two-level atom placed at
position xs along the resonator. The resulting mode frequencies and
couplings are polynomial/radical expressions in the element values; the
junction flux matrix element <down|phi_J|up> enters as a supplied number.

Note on the inductance polynomial ``lt_j``: the printed source expression
contains the term 3*L1^2*L2^2*La twice. The expression is transcribed
verbatim by default; set ``dedup_lt_j=True`` to drop the repetition. Both
readings are exposed because the duplication cannot be resolved from the
formulas alone.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize as opt

E_CHARGE = 1.602176634e-19          # C
PHI0_REDUCED = 1.054571817e-34 / (2 * E_CHARGE)   # hbar / 2e, Wb


@dataclass(frozen=True)
class CircuitParams:
    """Element values in SI units (H, F, m); matrix_element in Wb."""

    L1: float
    L2: float
    La: float
    Lb: float
    Ca: float
    Cb: float
    Cg: float
    CJ: float
    D: float
    xs: float
    matrix_element: float            # <down| phi_J |up>
    omega0: float                    # two-level splitting, rad/s
    phi0: float = PHI0_REDUCED
    e_charge: float = E_CHARGE

    def __post_init__(self):
        for name in ("L1", "L2", "La", "Lb", "Ca", "Cb", "Cg", "CJ", "D"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0 < self.xs < self.D):
            raise ValueError("atom position must satisfy 0 < xs < D")

    @property
    def cg_tilde(self) -> float:
        return self.Cg + self.Ca


@dataclass(frozen=True)
class Composites:
    c_sigma: float
    l_sigma: float
    lt_j: float
    lt_s: float
    lt_c: float
    e_q: float


def composites(c: CircuitParams, *, dedup_lt_j: bool = False) -> Composites:
    """Composite constants entering the effective parameters."""
    cg = c.cg_tilde
    c_sigma = cg * c.Cb + cg * c.CJ + c.CJ * c.Cb
    l1, l2, la = c.L1, c.L2, c.La
    ls = l2 * la + l1 * la + l1 * l2
    lt_j = (l1**2 * l2**3
            + 3 * l1**2 * l2**2 * la
            + (0.0 if dedup_lt_j else 3 * l1**2 * l2**2 * la)
            + 3 * l1**2 * l2 * la**2
            + l1**2 * la**3
            + l1 * l2**3 * la
            + 2 * l1 * l2**2 * la**2
            + l1 * l2 * la**3
            - 2 * ls * l1 * l2**2
            - 4 * ls * l1 * l2 * la
            - 2 * ls * l1 * la**2
            + ls**2 * l2
            + ls**2 * la)
    lt_s = (l1**2 * l2**3
            + l1**2 * l2**2 * la
            + l1 * l2**3 * la
            - 2 * ls * l1 * l2**2
            + ls**2 * l2)
    lt_c = (4 * ls * l1 * l2**2
            + 4 * ls * l1 * l2 * la
            - 2 * l1**2 * l2**3
            - 4 * l1**2 * l2**2 * la
            - 2 * l1**2 * l2 * la**2
            - 2 * l1 * l2**3 * la
            - 2 * l1 * l2**2 * la**2
            - 2 * ls**2 * l2)
    e_q = (cg + c.Cb) / (2 * c_sigma)
    return Composites(c_sigma=c_sigma, l_sigma=ls, lt_j=lt_j, lt_s=lt_s,
                      lt_c=lt_c, e_q=e_q)


@dataclass(frozen=True)
class EffectiveParams:
    omega1: float
    omega2: float
    g1: float                        # signed; the site physics depends on |g|
    g2: float
    composites: Composites


def _sinpi(x: float) -> float:
    """sin(pi x), exactly zero at integer x (reflection keeps the zeros)."""
    return float(np.sin(np.pi * x)) if x <= 0.5 else float(np.sin(np.pi * (1.0 - x)))


def _cospi(x: float) -> float:
    """cos(pi x), exactly zero at half-integer x."""
    return float(np.sin(np.pi * (0.5 - x)))


def effective_params(c: CircuitParams, *, dedup_lt_j: bool = False) -> EffectiveParams:
    """Mode frequencies and couplings of the equivalent two-mode Rabi site."""
    comp = composites(c, dedup_lt_j=dedup_lt_j)
    omega1 = np.pi / (c.D * np.sqrt(c.La * c.Ca))
    omega2 = np.pi / (c.D * np.sqrt(c.Lb * c.Cb))
    g1 = (-comp.lt_c * np.sqrt(omega1 / (c.La * c.D)) * _sinpi(c.xs / c.D)
          * c.matrix_element / (2 * comp.l_sigma**2 * c.L2))
    g2 = (c.cg_tilde * c.omega0 * np.sqrt(omega2 * c.Cb * c.D)
          * _cospi(c.xs / c.D) * c.matrix_element
          / (4 * np.pi * c.e_charge * comp.e_q * c.phi0 * comp.c_sigma))
    return EffectiveParams(omega1=float(omega1), omega2=float(omega2),
                           g1=float(g1), g2=float(g2), composites=comp)


TUNABLE = ("L1", "L2", "La", "Lb", "Ca", "Cb", "Cg", "CJ", "D", "xs",
           "matrix_element", "omega0")
DEGENERACY_RTOL = 1e-6


@dataclass
class TuneResult:
    circuit: CircuitParams
    effective: EffectiveParams
    converged: bool
    message: str


def tune_degenerate(circuit: CircuitParams, target_omega: float, target_g: float,
                    free: tuple[str, ...] | list[str], *,
                    dedup_lt_j: bool = False) -> TuneResult:
    """Adjust the free element values until omega1 = omega2 and |g1| = |g2|.

    The residuals are the two degeneracy mismatches scaled by the targets;
    when the matrix element is free, the coupling magnitude is rescaled to
    the target afterwards (it multiplies both couplings and leaves the
    frequencies untouched). Returns a no-solution report instead of
    raising when the root find stalls.
    """
    free = tuple(free)
    if len(free) < 2:
        raise ValueError("need at least 2 free parameters to tune both conditions")
    for name in free:
        if name not in TUNABLE:
            raise ValueError(f"unknown tunable parameter {name!r}")

    def residuals_of(c: CircuitParams):
        eff = effective_params(c, dedup_lt_j=dedup_lt_j)
        return np.array([(eff.omega1 - eff.omega2) / target_omega,
                         (abs(eff.g1) - abs(eff.g2)) / target_g]), eff

    r0, eff0 = residuals_of(circuit)
    if np.all(np.abs(r0) < DEGENERACY_RTOL):
        return TuneResult(circuit=circuit, effective=eff0, converged=True,
                          message="seed already degenerate")

    x0 = np.array([getattr(circuit, name) for name in free], dtype=float)
    lo = np.where([n == "xs" for n in free], 1e-9 * circuit.D, 1e-3 * np.abs(x0))
    hi = np.where([n == "xs" for n in free], (1 - 1e-9) * circuit.D, 1e3 * np.abs(x0))

    def build(x: np.ndarray) -> CircuitParams:
        return replace(circuit, **dict(zip(free, x)))

    def fun(x: np.ndarray) -> np.ndarray:
        return residuals_of(build(x))[0]

    sol = opt.least_squares(fun, x0, bounds=(lo, hi), xtol=1e-15, ftol=1e-15,
                            gtol=1e-15)
    tuned = build(sol.x)
    if "matrix_element" in free:
        eff = effective_params(tuned, dedup_lt_j=dedup_lt_j)
        g_now = 0.5 * (abs(eff.g1) + abs(eff.g2))
        if g_now > 0:
            tuned = replace(tuned, matrix_element=tuned.matrix_element
                            * target_g / g_now)
    r, eff = residuals_of(tuned)
    ok = bool(np.all(np.abs(r) < DEGENERACY_RTOL))
    msg = "converged" if ok else (
        f"no solution found: residuals {r[0]:.2e}, {r[1]:.2e} above {DEGENERACY_RTOL}"
    )
    return TuneResult(circuit=tuned, effective=eff, converged=ok, message=msg)
