"""Exception types raised by the package."""

from __future__ import annotations


class QhsmmError(Exception):
    """Base class for all errors raised by :mod:`qhsmm`."""


class DomainError(QhsmmError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class StructureError(QhsmmError, ValueError):
    """The mode transition graph is not strongly connected."""


class DivergenceError(QhsmmError, ArithmeticError):
    """A mode lifetime (or another moment) is infinite."""


class UnreachableStateError(QhsmmError, ValueError):
    """A causal pair with (numerically) zero survival probability was requested."""


class ResolutionError(QhsmmError, ValueError):
    """The grid step is too coarse for the model or misaligned with its breakpoints."""


class ShapeError(QhsmmError, ValueError):
    """Two objects live in incompatible bases."""


class SolverError(QhsmmError, RuntimeError):
    """An eigensolver failed to converge or returned an invalid spectrum."""


class InsufficientDataError(QhsmmError, ValueError):
    """Too few points to perform a fit."""


class SizeError(QhsmmError, MemoryError):
    """A resource guard (matrix dimension, level count) was exceeded."""


class ConsistencyError(QhsmmError, ValueError):
    """A trajectory cannot be replayed on the given model."""


class ParseError(QhsmmError, ValueError):
    """A process definition document could not be parsed.

    ``line`` and ``column`` are 1-based and ``None`` when the failure is
    not tied to a position in the text (e.g. a schema or invariant error).
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
