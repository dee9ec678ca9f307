"""Exception hierarchy shared by all modules."""


class CvxExtError(Exception):
    """Base class for library errors."""


class InvalidArgument(CvxExtError, ValueError):
    """An argument violates a documented precondition."""


class NumericFailure(CvxExtError, ArithmeticError):
    """An iterative solver did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual={residual:.3e})")
        self.residual = residual


class DegenerateBody(CvxExtError, ValueError):
    """The body has (numerically) empty interior where one is required."""


class RangeError(CvxExtError, ValueError):
    """An evaluation point lies outside the tabulated range of a profile."""


class ConstructionFailure(CvxExtError, RuntimeError):
    """A constructive step could not certify its quantitative bound."""


class CwFailure(CvxExtError, RuntimeError):
    """The convexity-compatibility condition fails; carries the witness."""

    def __init__(self, message, witness=None, report=None):
        super().__init__(message)
        self.witness = witness
        self.report = report
