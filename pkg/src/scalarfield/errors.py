"""Exception hierarchy shared by all solver modules."""


class ScalarFieldError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ScalarFieldError):
    """Invalid grid/solver/run configuration (bad R/h ratio, unknown keys, ...)."""


class GridMismatchError(ScalarFieldError):
    """Fields living on different grids were combined."""


class DegenerateInputError(ScalarFieldError):
    """An operation received a field that is identically zero (or has I(u) = 0)."""


class HypothesisViolationError(ScalarFieldError):
    """A potential violates a structural hypothesis (e.g. V(x) < 0 somewhere)."""


class SolverError(ScalarFieldError):
    """A linear or nonlinear solve failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SpectralDeficiencyError(SolverError):
    """The weight has too little support to carry the requested eigenpair."""


class InternalConsistencyError(ScalarFieldError):
    """A certified invariant failed after convergence (signals a solver fault)."""
