"""Exception types shared across the package."""


class SparseJLError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SparseJLError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstraintViolation(SparseJLError, ValueError):
    """A named precondition (e.g. a theorem validity constraint) fails."""


class DimensionMismatch(SparseJLError, ValueError):
    """Vector/matrix shapes are incompatible."""


class BudgetError(SparseJLError, RuntimeError):
    """An exact enumeration would exceed its configured budget."""


class FormatVersionError(SparseJLError, ValueError):
    """A serialized matrix declares an unsupported format version."""


class TruncatedStreamError(SparseJLError, ValueError):
    """A serialized matrix byte stream is shorter or longer than its header implies."""


class MatrixInvariantError(SparseJLError, ValueError):
    """A deserialized matrix violates a structural invariant."""
