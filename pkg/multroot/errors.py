"""Exception hierarchy shared by every multroot module.

ValueError-derived errors mean the input was wrong (exit code 2 from the CLI);
ArithmeticError-derived errors mean a numerical decision failed (exit code 3).
"""
from __future__ import annotations


class MultrootError(Exception):
    """Base class for every error raised by the package."""


class ParseError(MultrootError, ValueError):
    """Malformed system file, polynomial text or literal."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ShapeError(MultrootError, ValueError):
    """Length, variable-count or matrix-shape mismatch."""


class DomainMismatchError(MultrootError, ValueError):
    """Arithmetic between QQ and CC polynomials."""


class BasisError(MultrootError, ValueError):
    """Exponent set missing 0, not connected to 1, or with duplicates."""


class NumericalError(MultrootError, ArithmeticError):
    """A tolerance-driven decision could not be made consistently."""


class SimpleRootError(NumericalError):
    """The Jacobian has full column rank: nothing left to deflate."""


def exit_code(exc: BaseException) -> int:
    """CLI exit status for an exception raised by the package."""
    if isinstance(exc, NumericalError):
        return 3
    if isinstance(exc, (ParseError, ValueError)):
        return 2
    return 1
