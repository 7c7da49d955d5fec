"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Shapes of the operands are incompatible."""


class ImaginaryResidue(ArithmeticError):
    """An inverse mode-3 DFT left a non-negligible imaginary part.

    This means the spectral input was not conjugate symmetric, which in turn
    points at a bug in whatever produced it.
    """

    def __init__(self, residue, tolerance):
        super().__init__(
            f"imaginary residue {residue:.3e} exceeds tolerance {tolerance:.3e}"
        )
        self.residue = residue
        self.tolerance = tolerance


class SVDFailure(ArithmeticError):
    def __init__(self, slice_index, cause=None):
        super().__init__(f"SVD did not converge on spectral slice {slice_index}")
        self.slice_index = slice_index
        self.cause = cause


class SolverDiagnostic(ArithmeticError):
    """The solver produced non-finite values."""

    def __init__(self, message, outer=None, inner=None):
        where = []
        if outer is not None:
            where.append(f"outer iteration {outer}")
        if inner is not None:
            where.append(f"inner iteration {inner}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.outer = outer
        self.inner = inner
