"""Solvers for differential Sylvester and Lyapunov equations
``X'(t) = A X + X B + C``, ``X(0) = D``."""

from .bdf import BdfConfig, bdf_coefficients, bdf_integrate, bdf_step
from .dense_solvers import (
    DseProblem,
    SolveReport,
    solve_algebraic,
    solve_expm_direct,
    solve_spectral,
    solve_voc_split,
)
from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotDiagonalizable,
    ReferenceInfeasible,
    SeriesTooLong,
    SingularOperator,
    ZeroSeed,
)
from .krylov_projection import KrylovBasis, block_arnoldi, residual_estimate, solve_projected_dse
from .linalg_core import EigenDecomposition, FactoredMatrix, eig, expm, kron_oracle_apply
from .sylvester_operator import (
    SpectralData,
    SylvesterOperator,
    adjoint_apply,
    inner_product_uv,
    operator_norm,
    spectral_apply,
    split_apply,
    sylvester_apply,
)
from .taylor import TaylorOrder, order_for_tolerance, tail_bound, taylor_direct, taylor_factored

__version__ = "0.1.0"
