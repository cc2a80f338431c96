"""Exception hierarchy shared by all modules."""


class SemirateError(Exception):
    """Base class for library errors."""


class NumericalError(SemirateError):
    """A numerical procedure failed to reach its tolerance."""


class QuadratureError(NumericalError):
    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class SeriesError(NumericalError):
    """A power or asymptotic series did not converge."""


class UnboundedFunction(SemirateError):
    """Requested a bounded-function quantity for an unbounded Bernstein function."""


class UnsupportedKind(SemirateError):
    """The operation has no closed form for this Bernstein function kind."""


class DefectiveMatrix(NumericalError):
    """Eigenvector matrix too ill-conditioned for spectral calculus."""


class ZeroEigenvalue(SemirateError):
    """A negative power was requested of a non-injective generator."""


class UnboundedSemigroup(SemirateError):
    """The semigroup generated by -A is not bounded."""


class ConfigError(SemirateError):
    """Invalid run configuration or input file."""


class BoundViolation(SemirateError):
    """A certified inequality failed at some grid point."""

    def __init__(self, message: str, record=None, witness_path: str | None = None):
        super().__init__(message)
        self.record = record
        self.witness_path = witness_path
