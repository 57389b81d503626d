"""Exception types raised by the solvers."""


class DimensionMismatch(ValueError):
    """Operands are not conformal."""


class NotDiagonalizable(ArithmeticError):
    """Eigenvector matrix is too ill-conditioned to treat the matrix as diagonalizable."""


class SingularOperator(ArithmeticError):
    """Some eigenvalue sum alpha_i + beta_j is numerically zero."""


class SeriesTooLong(ArithmeticError):
    """Requested Taylor truncation order exceeds the cap."""


class ZeroSeed(ValueError):
    """Krylov seed block is numerically zero."""


class NoConvergence(RuntimeError):
    """Iteration stopped before reaching the requested tolerance.

    The best iterate is kept on ``self.result`` so callers can still use it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ReferenceInfeasible(RuntimeError):
    """No dense reference solution can be computed for the problem."""
