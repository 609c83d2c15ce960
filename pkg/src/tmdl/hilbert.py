"""Truncated Hilbert space, elementary operators and Hamiltonian builders.

Basis ordering is the row-major product index

    idx = (n1 * (n_max2 + 1) + n2) * (n_atoms + 1) + k,

with photon occupations n1, n2 and spin index k labelling the J_z
eigenvalue m = -N/2 + k inside the maximal collective-spin sector j = N/2.
Only that sector is kept: the collective operators never leave it and the
ground state lives there, so the spin factor has dimension N + 1.

All builders are pure and deterministic; matrices are complex128 CSR.
Cached factor matrices are shared and must be treated as read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import CutoffError, DimensionMismatchError
from .params import ModelParams

DIM_CEILING = 20_000

OPERATOR_KINDS = (
    "a1", "a2", "a1_dag", "a2_dag",
    "Jx", "Jy", "Jz",
    "N_e", "N_s", "parity_total", "identity",
)


@dataclass(frozen=True)
class HilbertSpace:
    n_atoms: int
    n_max1: int
    n_max2: int

    @property
    def dim(self) -> int:
        return (self.n_max1 + 1) * (self.n_max2 + 1) * (self.n_atoms + 1)

    @property
    def spin_j(self) -> float:
        return self.n_atoms / 2.0

    def index(self, n1: int, n2: int, k: int) -> int:
        return (n1 * (self.n_max2 + 1) + n2) * (self.n_atoms + 1) + k

    def occupations(self):
        """Arrays (n1, n2, k) labelling each basis index."""
        idx = np.arange(self.dim)
        ns = self.n_atoms + 1
        n2s = self.n_max2 + 1
        k = idx % ns
        rest = idx // ns
        n2 = rest % n2s
        n1 = rest // n2s
        return n1, n2, k


def build_space(n_atoms: int, n_max1: int, n_max2: int,
                ceiling: int = DIM_CEILING) -> HilbertSpace:
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if n_max1 < 0 or n_max2 < 0:
        raise ValueError("Fock cutoffs must be >= 0")
    space = HilbertSpace(n_atoms=n_atoms, n_max1=n_max1, n_max2=n_max2)
    if space.dim > ceiling:
        raise CutoffError(
            f"cutoffs ({n_max1}, {n_max2}) with N={n_atoms} give dim={space.dim} "
            f"> ceiling {ceiling}"
        )
    return space


def default_n_max(params: ModelParams) -> int:
    """Displacement-based Fock cutoff: coherent amplitude scales as g*sqrt(N)/omega."""
    g = max(params.g1, params.g2)
    return int(np.ceil(4.0 * params.n_atoms * (g / params.omega1) ** 2)) + 12


def space_for(params: ModelParams, n_max: int | None = None,
              ceiling: int = DIM_CEILING) -> HilbertSpace:
    if n_max is None:
        n_max = default_n_max(params)
    return build_space(params.n_atoms, n_max, n_max, ceiling=ceiling)


@dataclass(frozen=True)
class OperatorMatrix:
    """A dim x dim operator tagged with the space it acts on."""

    matrix: sp.spmatrix
    space: HilbertSpace | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return np.asarray(self.matrix.todense())

    def tocsr(self) -> sp.csr_matrix:
        return self.matrix.tocsr()

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.getH()
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


def _ladder(n_max: int) -> sp.csr_matrix:
    """Annihilation operator on a truncated Fock space of dim n_max + 1."""
    if n_max == 0:
        return sp.csr_matrix((1, 1), dtype=np.complex128)
    v = np.sqrt(np.arange(1, n_max + 1, dtype=np.float64))
    return sp.diags(v, 1, dtype=np.complex128, format="csr")


def _spin_ops(n_atoms: int):
    """Collective-spin matrices in the maximal sector, basis m = -j + k."""
    j = n_atoms / 2.0
    m = -j + np.arange(n_atoms + 1, dtype=np.float64)
    jz = sp.diags(m.astype(np.complex128), 0, format="csr")
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)) : entries on the subdiagonal row k+1
    raise_amp = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)).astype(np.complex128)
    jp = sp.diags(raise_amp, -1, format="csr")
    jm = jp.getH().tocsr()
    jx = (0.5 * (jp + jm)).tocsr()
    jy = (-0.5j * (jp - jm)).tocsr()
    return jx, jy, jz


@lru_cache(maxsize=64)
def _embedded(space: HilbertSpace):
    """Single-factor operators embedded in the product space (read-only)."""
    i1 = sp.identity(space.n_max1 + 1, dtype=np.complex128, format="csr")
    i2 = sp.identity(space.n_max2 + 1, dtype=np.complex128, format="csr")
    isp = sp.identity(space.n_atoms + 1, dtype=np.complex128, format="csr")
    a1l = _ladder(space.n_max1)
    a2l = _ladder(space.n_max2)
    jx, jy, jz = _spin_ops(space.n_atoms)

    def emb(f1, f2, fs):
        return sp.kron(sp.kron(f1, f2, format="csr"), fs, format="csr")

    return {
        "a1": emb(a1l, i2, isp),
        "a2": emb(i1, a2l, isp),
        "Jx": emb(i1, i2, jx),
        "Jy": emb(i1, i2, jy),
        "Jz": emb(i1, i2, jz),
        "identity": emb(i1, i2, isp),
    }


def operator(space: HilbertSpace, kind: str) -> OperatorMatrix:
    """Elementary operator embedded in the fixed product ordering."""
    ops = _embedded(space)
    if kind in ("a1", "a2", "Jx", "Jy", "Jz", "identity"):
        m = ops[kind]
    elif kind == "a1_dag":
        m = ops["a1"].getH().tocsr()
    elif kind == "a2_dag":
        m = ops["a2"].getH().tocsr()
    elif kind == "N_e":
        m = (ops["Jz"] + ops["a1"].getH() @ ops["a2"]
             + ops["a2"].getH() @ ops["a1"]).tocsr()
    elif kind == "N_s":
        m = (ops["Jz"] + ops["a1"].getH() @ ops["a1"]).tocsr()
    elif kind == "parity_total":
        # exp(i*pi*(n1 + n2 + Jz + N/2)): diagonal +-1 since n1 + n2 + k is integer
        n1, n2, k = space.occupations()
        m = sp.diags(((-1.0) ** (n1 + n2 + k)).astype(np.complex128), 0, format="csr")
    else:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {OPERATOR_KINDS}")
    return OperatorMatrix(matrix=m, space=space)


def _check_consistent(space: HilbertSpace, params: ModelParams):
    if space.n_atoms != params.n_atoms:
        raise DimensionMismatchError(
            f"space has N={space.n_atoms} but params have N={params.n_atoms}"
        )


def h_single_site(space: HilbertSpace, params: ModelParams) -> OperatorMatrix:
    """Two-mode Dicke site Hamiltonian, grand-canonical when mu != 0.

    H = w1 a1'a1 + w2 a2'a2 + w0 Jz + g1 (a1 + a1') Jx
        + i g2 (a2 - a2') Jy - mu N_e
    """
    _check_consistent(space, params)
    ops = _embedded(space)
    a1, a2, jx, jy, jz = ops["a1"], ops["a2"], ops["Jx"], ops["Jy"], ops["Jz"]
    h = (params.omega1 * (a1.getH() @ a1)
         + params.omega2 * (a2.getH() @ a2)
         + params.omega0 * jz
         + params.g1 * ((a1 + a1.getH()) @ jx)
         + 1j * params.g2 * ((a2 - a2.getH()) @ jy))
    if params.mu != 0.0:
        h = h - params.mu * operator(space, "N_e").matrix
    return OperatorMatrix(matrix=h.tocsr(), space=space)


def h_dicke(space: HilbertSpace, params: ModelParams) -> OperatorMatrix:
    """Single-mode Dicke Hamiltonian on the mode-1 factor (mode 2 idle)."""
    _check_consistent(space, params)
    ops = _embedded(space)
    a1, jx, jz = ops["a1"], ops["Jx"], ops["Jz"]
    h = (params.omega1 * (a1.getH() @ a1)
         + params.omega0 * jz
         + params.g1 * ((a1 + a1.getH()) @ jx))
    return OperatorMatrix(matrix=h.tocsr(), space=space)


def h_mean_field(space: HilbertSpace, params: ModelParams,
                 psi1: float, psi2: float) -> OperatorMatrix:
    """Decoupled-hopping Hamiltonian for real order parameters (psi1, psi2).

    H_MF = H_site - z t sum_m psi_m (a_m + a_m') + z t (psi1^2 + psi2^2) I
    """
    _check_consistent(space, params)
    ops = _embedded(space)
    zt = params.z * params.t
    h = h_single_site(space, params).matrix
    if zt != 0.0:
        a1, a2 = ops["a1"], ops["a2"]
        h = (h - zt * psi1 * (a1 + a1.getH()) - zt * psi2 * (a2 + a2.getH())
             + zt * (psi1 ** 2 + psi2 ** 2) * ops["identity"])
    return OperatorMatrix(matrix=h.tocsr(), space=space)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> sp.csr_matrix:
    return (a.matrix @ b.matrix - b.matrix @ a.matrix).tocsr()


def interior_mask(space: HilbertSpace, margin: int = 1) -> np.ndarray:
    """Boolean mask of states at least `margin` below both Fock cutoffs."""
    n1, n2, _ = space.occupations()
    return (n1 <= space.n_max1 - margin) & (n2 <= space.n_max2 - margin)


def commutator_interior_max(a: OperatorMatrix, b: OperatorMatrix,
                            margin: int = 1) -> float:
    """Max |element| of [A, B] on the truncation-safe interior block.

    Rectangular Fock truncation breaks ladder commutation relations in the
    outermost occupation layer, so operator identities that hold exactly in
    the untruncated algebra acquire spurious O(g * n_max) entries whose bra
    or ket occupies a cutoff level. Restricting both sides to states at
    least `margin` below the cutoffs removes exactly those artifacts; any
    residual on the interior block is a genuine property of the operators.
    """
    if a.space is None or a.space != b.space:
        raise DimensionMismatchError("operators must be tagged with the same space")
    c = commutator(a, b)
    mask = interior_mask(a.space, margin=margin)
    if not mask.any():
        raise ValueError(f"no interior states left at margin={margin}; "
                         "raise the Fock cutoffs")
    sub = c[np.ix_(mask, mask)]
    return 0.0 if sub.nnz == 0 else float(np.abs(sub.todense()).max())
