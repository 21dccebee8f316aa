"""Exception hierarchy shared by every module."""


class FtvnError(Exception):
    """Base class for all library errors."""


class ValidationError(FtvnError, ValueError):
    """Malformed input: wrong shape, non-finite entries, broken invariants."""


class NumericError(FtvnError, ArithmeticError):
    """An iterative kernel failed to converge or a construction lost accuracy."""


class RangeError(ValidationError):
    """A spectrum is not in the range of the spectral map."""


class UnsupportedError(FtvnError, NotImplementedError):
    """The operation has no construction for the given instance."""


class OrbitMismatchError(FtvnError, ValueError):
    """Two elements do not lie in the same orbit."""


class NotMajorizedError(FtvnError, ValueError):
    """A majorization precondition does not hold."""


class SizeGuardError(ValidationError):
    """Input too large for an enumeration-based routine."""


class HypothesisNotMet(FtvnError):
    """The hypothesis of a conditional check failed; the conclusion is not tested."""


class DegenerateFrameWarning(UserWarning):
    """Repeated eigenvalues: the frame (and anything built on it) is not unique."""
