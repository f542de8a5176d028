"""Exceptions and warning categories shared across the package."""


class ConvergenceError(ArithmeticError):
    """An iterative evaluation ran out of its iteration or subdivision budget."""


class BracketError(ArithmeticError):
    """A root could not be bracketed.

    Attributes hold the last evaluated points so the caller can report them.
    """

    def __init__(self, message, lower=None, upper=None, f_lower=None, f_upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.f_lower = f_lower
        self.f_upper = f_upper


class CancellationWarning(RuntimeWarning):
    """An alternating expansion lost a significant number of digits."""
