"""Exception types shared across the package."""


class TmdlError(Exception):
    """Base class for all package-specific failures."""


class CutoffError(TmdlError):
    """Fock cutoff exceeds the memory ceiling or fails to converge."""


class DimensionMismatchError(TmdlError):
    """Operator / space / parameter dimensions are inconsistent."""


class NonHermitianError(TmdlError):
    """Eigensolver input fails the hermiticity tolerance."""


class SolverConvergenceError(TmdlError):
    """Iterative eigensolver or optimizer failed to converge."""


class DegenerateGroundStateError(TmdlError):
    """Ground state is degenerate; perturbation coefficients undefined."""


class BoundaryHitError(TmdlError):
    """Order-parameter minimum sits on the search-box edge after retry."""


class BisectionRangeError(TmdlError):
    """Bisection endpoints do not bracket a phase change."""


class SelectionRuleError(TmdlError):
    """Matrix elements violate the excitation-number selection rules."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class JumpResolutionError(TmdlError):
    """A staircase jump could not be isolated to a unit label change."""


class NoPositiveRootError(TmdlError):
    """Hessian softening has no positive hopping root."""


class ConfigError(TmdlError):
    """Run configuration is malformed."""
