"""Effective XX spin-model parameters near lobe degeneracy points.

Close to a level crossing of adjacent excitation sectors the site reduces
to the two states {|n>, |n+1>}. The photon operators project onto ladder
operators of that two-state system,

    a1 -> alpha S+ + beta S-,      a2 -> alpha S+ - beta S-,

with S+ = |n><n+1| (it removes one excitation). Hopping then generates an
isotropic in-plane exchange J = 2 t (|alpha|^2 + |beta|^2) and the sector
gap Delta acts as a longitudinal field.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import DimensionMismatchError, SelectionRuleError, TmdlError
from .hilbert import DIM_CEILING, HilbertSpace, operator, h_single_site, space_for
from .params import ModelParams
from .spectra import _fix_phase, _realified, rotate_degenerate_to_label

PAIR_GAP_RATIO = 0.2         # pair gap must be below this fraction of the third gap
LABEL_CLUSTER_TOL = 1e-8     # energy window treated as one degenerate multiplet
SELECTION_TOL = 1e-8


class PairGapError(TmdlError):
    """The two lowest levels are not separated from the rest of the spectrum."""


@dataclass
class LobePair:
    """Two adjacent-sector eigenstates plus the surrounding spectrum."""

    space: HilbertSpace
    params: ModelParams
    n_lobe: float                 # lower excitation label
    delta: float                  # E(n+1 sector) - E(n sector), signed
    state_n: np.ndarray
    state_n1: np.ndarray
    energies: np.ndarray          # all computed eigenvalues
    states: np.ndarray            # label-rotated eigenvectors (dim x k)
    labels: np.ndarray            # <N_e> per computed state
    label_variance: np.ndarray


def lobe_pair_states(params: ModelParams, *, n_max: int | None = None, k: int = 10,
                     pair_gap_ratio: float = PAIR_GAP_RATIO,
                     ceiling: int = DIM_CEILING) -> LobePair:
    """Identify the adjacent-sector pair spanned by the two lowest levels.

    Valid near a staircase jump (N >= 2) or in the quasi-degenerate
    ultrastrong regime (N = 1); enforced by requiring the pair gap to be
    small against the gap to the third level. Degenerate multiplets are
    rotated to sharp excitation labels, and each state's global phase is
    fixed by making its largest amplitude real positive.
    """
    space = space_for(params, n_max, ceiling=ceiling)
    h = h_single_site(space, params)
    # dense vectors: the selection-rule audit needs excited eigenstates far
    # more accurate than the Lanczos path resolves for clustered levels
    k = min(k, space.dim)
    evals, evecs = la.eigh(_realified(h.toarray()), subset_by_index=[0, k - 1])
    if k >= 3:
        pair_gap = evals[1] - evals[0]
        third_gap = evals[2] - evals[0]
        if pair_gap > pair_gap_ratio * third_gap:
            raise PairGapError(
                f"pair gap {pair_gap:.3e} is not small against the third-level "
                f"gap {third_gap:.3e}; no two-state reduction here"
            )
    ne = operator(space, "N_e").matrix
    vecs = rotate_degenerate_to_label(evals, evecs, ne,
                                      cluster_tol=LABEL_CLUSTER_TOL * params.omega1)
    vecs = np.column_stack([_fix_phase(vecs[:, i]) for i in range(vecs.shape[1])])
    labels = np.real(np.einsum("ik,ik->k", vecs.conj(), ne @ vecs))
    label_var = np.real(np.einsum("ik,ik->k", vecs.conj(), ne @ (ne @ vecs))) - labels ** 2

    lab0 = round(labels[0] + params.n_atoms / 2)
    lab1 = round(labels[1] + params.n_atoms / 2)
    if abs(lab1 - lab0) != 1:
        raise DimensionMismatchError(
            f"two lowest states carry labels {labels[0]:.4f} and {labels[1]:.4f}; "
            "not adjacent excitation sectors"
        )
    if lab0 < lab1:
        i_n, i_n1 = 0, 1
    else:
        i_n, i_n1 = 1, 0
    delta = float(evals[i_n1] - evals[i_n])
    return LobePair(space=space, params=params, n_lobe=float(labels[i_n]),
                    delta=delta, state_n=vecs[:, i_n], state_n1=vecs[:, i_n1],
                    energies=evals, states=vecs, labels=labels,
                    label_variance=label_var)


@dataclass
class SelectionReport:
    """Residuals of the excitation-number selection rules.

    (a1 + a2) removes one excitation, so <i|(a1+a2)|j> must vanish unless
    label(j) = label(i) + 1; (a1 - a2) adds one, with the mirrored rule.
    """

    max_violation_plus: float
    max_violation_minus: float
    n_states: int
    ok: bool

    @property
    def max_violation(self) -> float:
        return max(self.max_violation_plus, self.max_violation_minus)


def project_operators(pair: LobePair, *, tol: float = SELECTION_TOL,
                      raise_on_violation: bool = True):
    """Projection coefficients (alpha, beta) and a selection-rule audit.

    alpha = <n|(a1 + a2)|n+1> / 2 and beta = <n+1|(a1 - a2)|n> / 2 are the
    only matrix elements the rules allow; the audit scans every computed
    eigenstate pair for forbidden elements, which signals either broken
    mode symmetry or a cutoff artifact.
    """
    space = pair.space
    a1 = operator(space, "a1").matrix
    a2 = operator(space, "a2").matrix
    a_plus = a1 + a2
    a_minus = a1 - a2

    alpha = complex(pair.state_n.conj() @ (a_plus @ pair.state_n1)) / 2.0
    beta = complex(pair.state_n1.conj() @ (a_minus @ pair.state_n)) / 2.0

    vecs = pair.states
    labels_int = np.round(pair.labels + pair.params.n_atoms / 2).astype(int)
    mplus = vecs.conj().T @ (a_plus @ vecs)
    mminus = vecs.conj().T @ (a_minus @ vecs)
    dlab = labels_int[None, :] - labels_int[:, None]    # label(j) - label(i)
    viol_plus = float(np.abs(np.where(dlab == 1, 0.0, mplus)).max())
    viol_minus = float(np.abs(np.where(dlab == -1, 0.0, mminus)).max())
    report = SelectionReport(max_violation_plus=viol_plus,
                             max_violation_minus=viol_minus,
                             n_states=vecs.shape[1],
                             ok=max(viol_plus, viol_minus) <= tol)
    if raise_on_violation and not report.ok:
        raise SelectionRuleError(
            f"selection-rule violation {report.max_violation:.3e} exceeds {tol:.1e}",
            report=report,
        )
    return alpha, beta, report


@dataclass(frozen=True)
class XxModel:
    n_lobe: float
    delta: float
    alpha: complex
    beta: complex
    t: float

    @property
    def j_exchange(self) -> float:
        return 2.0 * self.t * (abs(self.alpha) ** 2 + abs(self.beta) ** 2)


def xx_parameters(alpha: complex, beta: complex, delta: float, t: float,
                  n_lobe: float = np.nan) -> XxModel:
    """Package the effective spin-model parameters for hopping t."""
    return XxModel(n_lobe=n_lobe, delta=delta, alpha=alpha, beta=beta, t=t)
