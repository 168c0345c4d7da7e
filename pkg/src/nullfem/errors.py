"""Exception types shared across the package."""


class NullFemError(Exception):
    """Base class for every error raised by this package."""


class SparseFormatError(NullFemError, ValueError):
    """Matrix data violates the canonical CSR contract."""


class DimensionMismatchError(NullFemError, ValueError):
    """Operands have incompatible shapes."""


class NotPositiveDefiniteError(NullFemError, ArithmeticError):
    """Cholesky factorization hit a non-positive pivot.

    ``pivot_index`` is the offending row/column in the matrix's original
    (unpermuted) numbering.
    """

    def __init__(self, pivot_index: int, message: str | None = None):
        self.pivot_index = int(pivot_index)
        super().__init__(
            message or f"matrix is not positive definite (pivot {self.pivot_index})"
        )


class SingularMatrixError(NullFemError, ArithmeticError):
    """LU factorization found no acceptable pivot.

    ``pivot_index`` is the column (original numbering) at which
    elimination broke down.
    """

    def __init__(self, pivot_index: int, message: str | None = None):
        self.pivot_index = int(pivot_index)
        super().__init__(
            message or f"matrix is numerically singular (pivot column {self.pivot_index})"
        )


class ConstraintError(NullFemError, ValueError):
    """A constraint declaration violates the builder invariants."""


class InfeasibleConstraintError(NullFemError):
    """The constraint set admits no solution.

    ``label`` names the constraint whose reduced row is zero but whose
    reduced right-hand side is not.
    """

    def __init__(self, label: str, residual: float):
        self.label = label
        self.residual = float(residual)
        super().__init__(
            f"inconsistent constraint {label!r}: reduced row vanishes but its "
            f"right-hand side is {residual:.3e}"
        )


class SolverError(NullFemError, RuntimeError):
    """A solve failed numerically (singular reduced system, residual blow-up)."""


class ProblemFormatError(NullFemError, ValueError):
    """A problem file failed schema validation.

    Carries the offending field path and, when known, the source line.
    """

    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.line = line
        where = f"{field} (line {line})" if line is not None else field
        super().__init__(f"{where}: {message}")
