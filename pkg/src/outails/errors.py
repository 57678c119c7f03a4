"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DataError(ValueError):
    """Input data cannot support the requested statistic."""


class InsufficientDataError(DataError):
    """Too few observations for the requested estimate."""


class ParseError(DataError):
    """A data file could not be parsed.

    The 1-based line number of the offending row, when known, is stored in
    ``line``.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnsupportedSideError(ValueError):
    """The requested tail has no square-exponential growth structure."""


class TransformRangeError(DomainError):
    """Target value outside the numerically representable range of a transform."""
