"""Exception hierarchy shared by every kpdkit module."""


class KpdError(Exception):
    """Base class for all kpdkit errors."""


class DomainError(KpdError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParseError(KpdError, ValueError):
    """Malformed hypermatrix or matrix text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateFactor(KpdError, ArithmeticError):
    """A fixed factor vanished during an alternating update."""


class ZeroStationaryPoint(KpdError):
    """The solver keeps collapsing to the zero product."""


class AllRestartsFailed(KpdError):
    """Every restart of a multistart run ended in degeneracy."""
