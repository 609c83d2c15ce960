"""Physical parameter container for the two-mode Dicke site and lattice."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """Single-site and lattice parameters, in units of a reference frequency.

    The site couples N two-level atoms (collective spin j = N/2) to two
    boson modes; `mu` is the chemical potential conjugate to the hybridized
    excitation number (0 in the canonical ensemble), `z` the lattice
    coordination number and `t` the photon hopping rate.
    """

    omega1: float = 1.0
    omega2: float = 1.0
    omega0: float = 1.0
    g1: float = 0.0
    g2: float = 0.0
    n_atoms: int = 1
    mu: float = 0.0
    z: int = 2
    t: float = 0.0

    def __post_init__(self):
        if self.omega1 <= 0 or self.omega2 <= 0 or self.omega0 <= 0:
            raise ValueError("omega1, omega2, omega0 must be positive")
        if self.g1 < 0 or self.g2 < 0:
            raise ValueError("couplings g1, g2 must be non-negative")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError("n_atoms must be an integer >= 1")
        if int(self.z) != self.z or self.z < 1:
            raise ValueError("coordination number z must be an integer >= 1")
        if self.t < 0:
            raise ValueError("hopping rate t must be non-negative")

    def degenerate(self, rel_tol: float = 1e-12) -> bool:
        """Both modes identical: equal frequencies and equal couplings."""
        return math.isclose(
            self.omega1, self.omega2, rel_tol=rel_tol, abs_tol=0.0
        ) and math.isclose(self.g1, self.g2, rel_tol=rel_tol, abs_tol=0.0)

    @property
    def coupling_ratio(self) -> float:
        """g2/g1 ratio preserved by coupling sweeps (1 when g1 == 0)."""
        return self.g2 / self.g1 if self.g1 > 0 else 1.0


def symmetric_params(g, *, omega=1.0, omega0=1.0, n_atoms=1, mu=0.0, z=2, t=0.0):
    """Degenerate-mode parameter set with equal couplings g1 = g2 = g."""
    return ModelParams(
        omega1=omega, omega2=omega, omega0=omega0,
        g1=g, g2=g, n_atoms=n_atoms, mu=mu, z=z, t=t,
    )


SWEEPABLE = ("g", "mu", "t", "g1", "g2")


def sweep_replace(params: ModelParams, variable: str, value: float) -> ModelParams:
    """Return params with the sweep variable set to `value`.

    Sweeping "g" rescales both couplings, preserving the template's g2/g1
    ratio so deviation studies stay on their deviation line.
    """
    if variable == "g":
        return replace(params, g1=value, g2=value * params.coupling_ratio)
    if variable in ("mu", "t", "g1", "g2"):
        return replace(params, **{variable: value})
    raise ValueError(f"unknown sweep variable {variable!r}; expected one of {SWEEPABLE}")
