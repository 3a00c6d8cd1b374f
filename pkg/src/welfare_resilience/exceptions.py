"""Exception hierarchy.

Every error raised on bad input derives from both ``ResilienceError`` and the
closest builtin (mostly ``ValueError``) so callers can catch either.
"""


class ResilienceError(Exception):
    """Base class for all package errors."""


class SeriesTooShort(ResilienceError, ValueError):
    pass


class EmptyInput(ResilienceError, ValueError):
    pass


class LagTooLarge(ResilienceError, ValueError):
    pass


class LengthMismatch(ResilienceError, ValueError):
    pass


class DegenerateInput(ResilienceError, ValueError):
    """A constant sequence where variation is required."""


class DegenerateSeries(ResilienceError, ValueError):
    """Increments have zero variance, so the likelihood is unbounded."""


class InvalidParams(ResilienceError, ValueError):
    pass


class InvalidSigma(ResilienceError, ValueError):
    pass


class InvalidInput(ResilienceError, ValueError):
    pass


class ConvergenceFailure(ResilienceError, RuntimeError):
    """Optimizer did not converge.

    Attributes
    ----------
    best : object
        Best point found before giving up (an ``ArmaFit`` for ARMA fits).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class AllFitsFailed(ResilienceError, RuntimeError):
    pass


class SingularRegression(ResilienceError, ValueError):
    pass


class RankDeficient(ResilienceError, ValueError):
    pass


class InsufficientData(ResilienceError, ValueError):
    pass


class EmptyPanel(ResilienceError, ValueError):
    pass


class EmptyYear(ResilienceError, ValueError):
    pass


class ParseError(ResilienceError, ValueError):
    """Malformed input file; carries the offending location."""

    def __init__(self, message, path=None, line=None, column=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            if column is not None:
                loc += f" (column {column!r})"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line
        self.column = column


class DuplicateObservation(ResilienceError, ValueError):
    pass


class NonContiguousSeries(ResilienceError, ValueError):
    pass
