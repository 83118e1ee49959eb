"""Exception types shared across the package."""


class KimuraError(Exception):
    """Base class for all library-specific errors."""


class DomainError(KimuraError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SectorError(DomainError):
    """A complex time or argument lies outside the admissible sector."""


class ConvergenceError(KimuraError, RuntimeError):
    """An iterative or adaptive computation failed to reach its tolerance.

    Carries a ``diagnostics`` dict (last error estimate, refinement level, ...)
    so callers can report what was achieved.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class StepSizeError(KimuraError, ValueError):
    """A time step is too large for the requested scheme geometry."""


class NotCleanError(KimuraError, RuntimeError):
    """A boundary face is neither uniformly tangent nor uniformly transverse.

    No classification is guessed; the offending face and the measured range of
    the defining-function image are reported instead.
    """

    def __init__(self, message, face=None, lo=None, hi=None):
        super().__init__(message)
        self.face = face
        self.lo = lo
        self.hi = hi


class SmoothnessError(KimuraError, ValueError):
    """Supplied data lacks the derivatives or decay an operation requires."""
