"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class VineError(Exception):
    """Base class for every error raised by vinedist."""

    kind = "error"


class DomainError(VineError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    kind = "domain"


class ShapeError(VineError, ValueError):
    kind = "shape"


class StructureError(VineError, ValueError):
    """A matrix is not a valid vine structure matrix.

    ``violations`` holds the individual findings of the validator.
    """

    kind = "structure"

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ContractError(VineError, ValueError):
    """Precondition between two objects violated (e.g. unequal diagonals)."""

    kind = "contract"


class LimitError(ContractError):
    """Refusal because a soft dimension limit is exceeded."""

    kind = "limit"


class ParseError(VineError, ValueError):
    kind = "parse"


class NumericError(VineError, ArithmeticError):
    """A numerical routine failed to converge.

    ``detail`` carries whatever partial information is available, such as the
    worst subinterval or the best estimate reached.
    """

    kind = "numeric"

    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.detail = detail
