"""Exception and warning types raised by latsusy."""


class LatticeError(Exception):
    """Base class for all latsusy errors."""


class InvalidArgument(LatticeError, ValueError):
    pass


class InvalidDomain(LatticeError, ValueError):
    """A lattice function was requested at a site where it is undefined (a pole)."""


class ToleranceNotMet(LatticeError):
    """A truncated kernel sum did not reach the requested tail tolerance."""

    def __init__(self, message, tail_estimate):
        super().__init__(message)
        self.tail_estimate = tail_estimate


class NoSeriesSolution(LatticeError):
    pass


class UnsupportedForm(LatticeError, ValueError):
    pass


class NotShapeInvariant(LatticeError):
    def __init__(self, message, parameter=None, residual=None):
        super().__init__(message)
        self.parameter = parameter
        self.residual = residual


class ConvergenceFailure(LatticeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class DomainCoverageWarning(UserWarning):
    """A zero-extended function was read outside its stored window."""
