"""Exception hierarchy.

Everything raised on purpose derives from :class:`LRKError`. Errors caused by
bad user input also derive from :class:`ValueError`; the CLI maps those to
exit code 2 and every other :class:`LRKError` to exit code 3.
"""


class LRKError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LRKError, ValueError):
    """Invalid chain parameters or flags."""


class UnsupportedModeError(ParameterError):
    """The requested evaluation mode is not available for these parameters."""


class SizeError(ParameterError):
    """A system size outside the supported range."""


class WindowError(ParameterError):
    """Too few points inside a fit window."""


class ComparisonError(ParameterError):
    """A scan and a prediction were computed for different parameters."""


class DomainError(LRKError, ValueError):
    """Argument outside the domain of a function."""


class BranchError(DomainError):
    """Argument lies on a branch cut of a logarithm or square root."""


class SingularPointError(LRKError):
    """The symbol is undefined at a zero of the dispersion relation."""

    def __init__(self, theta, message=None):
        self.theta = theta
        super().__init__(message or f"dispersion vanishes at theta={theta!r}; symbol undefined")


class SingularGridError(LRKError):
    """A lattice momentum hits a zero of the dispersion relation."""


class SingularMatrixError(LRKError):
    """Matrix singular to working precision."""

    def __init__(self, message, rcond=None):
        self.rcond = rcond
        super().__init__(message)


class StructureError(LRKError):
    """A structural invariant (e.g. the +/- spectrum pairing) is violated."""


class ConsistencyError(LRKError):
    """An internal consistency check failed (e.g. non-unit trace)."""


class NonDiagonalizableError(LRKError):
    """Matrix is defective to working precision."""


class WindingError(LRKError):
    """Symbol determinant has non-zero winding number."""


class ToleranceError(LRKError):
    """A numerical procedure did not reach its target tolerance."""

    def __init__(self, message, estimate=None, error=None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)
