"""Ground-state toolkit for the two-mode Dicke lattice.

Exact diagonalization of the single site, mean-field Mott-lobe phase
diagrams, perturbative phase boundaries, effective XX spin-model
extraction near sector degeneracies, and the circuit element-value
mapping onto the two-mode Rabi parameters.
"""

__version__ = "0.1.0"

from .params import ModelParams, symmetric_params
from .hilbert import HilbertSpace, OperatorMatrix, build_space, operator
from .hilbert import h_dicke, h_mean_field, h_single_site

__all__ = [
    "ModelParams", "symmetric_params",
    "HilbertSpace", "OperatorMatrix", "build_space", "operator",
    "h_single_site", "h_dicke", "h_mean_field",
    "__version__",
]
