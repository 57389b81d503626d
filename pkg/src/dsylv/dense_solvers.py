"""Closed-form dense solvers for ``X' = AX + XB + C``, ``X(0) = D``."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, SingularOperator
from .linalg_core import FactoredMatrix, as_matrix, expm
from .sylvester_operator import (
    SylvesterOperator,
    exp_mask,
    inverse_mask,
    operator_norm,
    spectral_apply,
    sylvester_apply,
)

PHI_SWITCH = 1e-8
QUAD_NODES = 32
# solve_expm_direct uses the Bartels-Stewart split only when the smallest
# eigenvalue sum is at least this fraction of max(1, max |alpha_i + beta_j|)
SPLIT_GAP_RTOL = 1e-4


@dataclass
class DseProblem:
    op: SylvesterOperator
    C: np.ndarray
    D: np.ndarray
    t_grid: np.ndarray
    lyapunov: bool = False

    def __post_init__(self):
        self.C = as_matrix(self.C, "C")
        self.D = as_matrix(self.D, "D")
        self.t_grid = np.asarray(self.t_grid, dtype=float).reshape(-1)
        shape = self.op.shape
        if self.C.shape != shape or self.D.shape != shape:
            raise DimensionMismatch(f"C {self.C.shape} / D {self.D.shape} do not match {shape}")
        if self.t_grid.size == 0 or self.t_grid[0] != 0.0:
            raise ValueError("t_grid must be nonempty and start at 0")
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")

    @classmethod
    def from_matrices(cls, A, B, C, D, t_grid, lyapunov=False) -> "DseProblem":
        return cls(SylvesterOperator(A, B), C, D, t_grid, lyapunov)

    @property
    def A(self):
        return self.op.A

    @property
    def B(self):
        return self.op.B

    def rhs(self, X) -> np.ndarray:
        return sylvester_apply(self.op, X) + self.C


@dataclass
class SolveReport:
    t_grid: np.ndarray
    snapshots: list
    method: str
    residual_norms: np.ndarray
    wall_time: float
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.snapshots) != len(self.t_grid):
            raise ValueError("one snapshot per time point required")

    def dense(self, k: int) -> np.ndarray:
        X = self.snapshots[k]
        return X.dense() if isinstance(X, FactoredMatrix) else X

    def dense_snapshots(self) -> list:
        return [self.dense(k) for k in range(len(self.snapshots))]


def hermitian_part(X) -> np.ndarray:
    return 0.5 * (X + X.conj().T)


def phi1(sums, t: float) -> np.ndarray:
    """``(exp(t*s) - 1) / s`` entrywise, equal to ``t`` where ``s = 0``."""
    sums = np.asarray(sums, dtype=np.complex128)
    z = t * sums
    out = np.empty_like(z)
    small = np.abs(z) < PHI_SWITCH
    big = ~small
    out[big] = np.expm1(z[big]) / sums[big]
    zs = z[small]
    out[small] = t * (1.0 + zs / 2.0 + zs * zs / 6.0 + zs * zs * zs / 24.0)
    return out


def _finish(p: DseProblem, X):
    return hermitian_part(X) if p.lyapunov else X


def solve_spectral(p: DseProblem) -> SolveReport:
    """Hadamard-mask closed form in the eigen-coordinates of A and B^H."""
    start = time.perf_counter()
    s = p.op.spectral
    sums = s.eigensums
    WD = s.coords(p.D)
    WC = s.coords(p.C)
    W0 = sums * WD + WC  # coordinates of X'(0)
    snaps, res = [], []
    for t in p.t_grid:
        E = np.exp(t * sums)
        X = _finish(p, s.from_coords(E * WD + phi1(sums, t) * WC))
        dX = s.from_coords(E * W0)
        snaps.append(X)
        res.append(np.linalg.norm(dX - p.rhs(X)))
    wall = time.perf_counter() - start
    return SolveReport(p.t_grid.copy(), snaps, "spectral", np.array(res), wall,
                       {"cond_UV": s.condition(), "op_norm": operator_norm(s)})


def solve_voc_split(p: DseProblem) -> SolveReport:
    """``X(t) = e^{tS}(D) + S^-1(-C) - e^{tS} S^-1(-C)``.

    Raises :class:`SingularOperator` if some eigenvalue sum vanishes.
    """
    start = time.perf_counter()
    s = p.op.spectral
    steady = spectral_apply(s, inverse_mask(s), -p.C)
    dX0 = p.rhs(p.D)
    snaps, res = [], []
    for t in p.t_grid:
        E = exp_mask(s, t)
        # steady - e^{tS}(steady) as one mask keeps X(0) = D and avoids cancellation
        X = spectral_apply(s, E, p.D) + spectral_apply(s, -np.expm1(t * s.eigensums), steady)
        X = _finish(p, X)
        snaps.append(X)
        res.append(np.linalg.norm(spectral_apply(s, E, dX0) - p.rhs(X)))
    wall = time.perf_counter() - start
    return SolveReport(p.t_grid.copy(), snaps, "voc_split", np.array(res), wall,
                       {"steady_state_norm": float(np.linalg.norm(steady))})


def _gauss_integral(A, B, C, a: float, b: float, nodes: int = QUAD_NODES) -> np.ndarray:
    """Composite Gauss-Legendre for ``int_a^b e^{sA} C e^{sB} ds``."""
    scale = np.linalg.norm(A, 1) + np.linalg.norm(B, 1)
    panels = max(1, int(np.ceil((b - a) * scale / 4.0)))
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    total = np.zeros_like(C)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        for xi, wi in zip(x, w):
            s = lo + half * (xi + 1.0)
            total += (half * wi) * (expm(s * A) @ C @ expm(s * B))
    return total


def _min_eigensum(A, B) -> tuple[float, float]:
    a = np.linalg.eigvals(A)
    b = np.linalg.eigvals(B)
    sums = np.abs(a[:, None] + b[None, :])
    return float(sums.min()), float(sums.max())


def solve_expm_direct(p: DseProblem) -> SolveReport:
    """``e^{tA} D e^{tB}`` plus the constant-C integral.

    The integral is ``X_inf - e^{tA} X_inf e^{tB}`` with ``X_inf`` from a
    Schur-based dense Sylvester solve when the eigenvalue sums are well
    separated from zero, otherwise composite Gauss-Legendre quadrature.
    """
    start = time.perf_counter()
    A, B, C, D = p.A, p.B, p.C, p.D
    has_c = bool(np.any(C))
    use_split = False
    if has_c:
        gap, big = _min_eigensum(A, B)
        use_split = gap >= SPLIT_GAP_RTOL * max(1.0, big)
    steady = scipy.linalg.solve_sylvester(A, B, -C) if use_split else None
    dX0 = p.rhs(D)
    integral = np.zeros_like(C)
    t_prev = 0.0
    snaps, res = [], []
    for t in p.t_grid:
        EA, EB = expm(t * A), expm(t * B)
        X = EA @ D @ EB
        if has_c:
            if use_split:
                X = X + steady - EA @ steady @ EB
            else:
                integral = integral + _gauss_integral(A, B, C, t_prev, t)
                X = X + integral
        X = _finish(p, X)
        snaps.append(X)
        res.append(np.linalg.norm(EA @ dX0 @ EB - p.rhs(X)))
        t_prev = t
    wall = time.perf_counter() - start
    info = {"integral": "split" if use_split else ("quadrature" if has_c else "none")}
    return SolveReport(p.t_grid.copy(), snaps, "expm_direct", np.array(res), wall, info)


def solve_algebraic(op: SylvesterOperator, C) -> np.ndarray:
    """X with ``AX + XB + C = 0`` through the inverse spectral mask."""
    C = as_matrix(C, "C")
    s = op.spectral
    return spectral_apply(s, inverse_mask(s), -C)


def algebraic_residual(op: SylvesterOperator, X, C) -> float:
    return float(np.linalg.norm(sylvester_apply(op, X) + C))


__all__ = [
    "DseProblem", "SolveReport", "SingularOperator", "phi1", "hermitian_part",
    "solve_spectral", "solve_voc_split", "solve_expm_direct", "solve_algebraic",
    "algebraic_residual",
]
