"""Truncated Taylor series for the differential Sylvester equation.

``X(t) = D + sum_{k>=1} t^k/k! (S^k(D) + S^{k-1}(C))``.  The D-part is kept
through ``k = m1`` and the C-part through ``k = m2``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb

import numpy as np

from .dense_solvers import DseProblem, SolveReport, hermitian_part
from .errors import DimensionMismatch, SeriesTooLong
from .linalg_core import FactoredMatrix, as_matrix
from .sylvester_operator import norm_uv, operator_norm, sylvester_apply

ORDER_CAP = 500
_TAIL_RTOL = 1e-18


@dataclass(frozen=True)
class TaylorOrder:
    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 < 0 or self.m2 < 0:
            raise ValueError(f"orders must be nonnegative, got {self.m1}, {self.m2}")


def taylor_direct(p: DseProblem, ord: TaylorOrder, t: float) -> np.ndarray:
    """Partial sums with operator powers accumulated one application at a time."""
    X = p.D.copy()
    SkD = p.D
    coef = 1.0
    for k in range(1, ord.m1 + 1):
        coef *= t / k
        SkD = sylvester_apply(p.op, SkD)
        X = X + coef * SkD
    SkC = p.C
    coef = 1.0
    for k in range(1, ord.m2 + 1):
        coef *= t / k
        if k > 1:
            SkC = sylvester_apply(p.op, SkC)
        X = X + coef * SkC
    return hermitian_part(X) if p.lyapunov else X


def coefficient_matrix(m: int, t: float, inhomogeneous: bool = False) -> np.ndarray:
    """Anti-triangular coefficient block of the factored Taylor sum.

    Homogeneous part (size m+1): entry (i, j) is ``t^{i+j}/(i+j)! * C(i+j, j)``
    for ``i + j <= m``.  Inhomogeneous part (size m): entry (i, j) is
    ``t^{i+j+1}/(i+j+1)! * C(i+j, j)`` for ``i + j <= m - 1``.
    """
    size = m if inhomogeneous else m + 1
    shift = 1 if inhomogeneous else 0
    # powers[k] = t^k / k!
    powers = np.ones(size + shift)
    for k in range(1, size + shift):
        powers[k] = powers[k - 1] * t / k
    T = np.zeros((size, size))
    for i in range(size):
        for j in range(size - i):
            T[i, j] = powers[i + j + shift] * comb(i + j, j)
    return T


def _krylov_blocks(M, F, count: int) -> np.ndarray:
    """Stack ``[F, M F, ..., M^{count-1} F]`` as an array of shape (count, n, r)."""
    out = np.empty((count,) + F.shape, dtype=np.complex128)
    if count:
        out[0] = F
    for k in range(1, count):
        out[k] = M @ out[k - 1]
    return out


def _factored_part(A, B, F: FactoredMatrix, T) -> np.ndarray:
    size = T.shape[0]
    n, m = F.shape
    if size == 0 or F.rank == 0:
        return np.zeros((n, m), dtype=np.complex128)
    left = _krylov_blocks(A, F.F1, size)                  # A^i F1
    right = _krylov_blocks(B.conj().T, F.F2, size)        # (B^H)^j F2, i.e. (F2^H B^j)^H
    # blockwise: sum_i sum_j T_ij (A^i F1) (F2^H B^j)
    mixed = np.einsum("ij,inr->jnr", T, left)
    return np.einsum("jnr,jmr->nm", mixed, right.conj())


def taylor_factored(D: FactoredMatrix, C: FactoredMatrix, A, B, ord: TaylorOrder, t: float) -> np.ndarray:
    """Same partial sums as :func:`taylor_direct`, evaluated from the low-rank
    factors through the block Krylov rows ``[F1, A F1, ...]`` and columns
    ``[F2^H; F2^H B; ...]``.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    shape = (A.shape[0], B.shape[0])
    if D.shape != shape or C.shape != shape:
        raise DimensionMismatch(f"factors {D.shape}/{C.shape} do not match {shape}")
    X = _factored_part(A, B, D, coefficient_matrix(ord.m1, t))
    if ord.m2 > 0:
        X = X + _factored_part(A, B, C, coefficient_matrix(ord.m2, t, inhomogeneous=True))
    return X


def _tail(first: float, ratio, start: int) -> float:
    """Sum ``sum_{k>=start} c_k`` with ``c_start = first`` and ``c_{k+1} = c_k * ratio(k)``.

    Stops once the sequence is decreasing and the next term is below
    ``_TAIL_RTOL`` of the running sum.
    """
    total = 0.0
    term = first
    k = start
    while True:
        total += term
        nxt = term * ratio(k)
        if nxt == 0.0:
            return total
        if not np.isfinite(total):
            return float("inf")
        if nxt <= term and nxt <= _TAIL_RTOL * total:
            return total
        term = nxt
        k += 1


def _d_tail(x: float, m1: int) -> float:
    # terms x^k / k! for k > m1
    if x == 0.0:
        return 0.0
    first = 1.0
    for k in range(1, m1 + 2):
        first *= x / k
    return _tail(first, lambda k: x / (k + 1), m1 + 1)


def _c_tail(at: float, x: float, m2: int) -> float:
    # terms |t|^k op^{k-1} / k! = |t| * x^{k-1} / k! for k > m2
    if at == 0.0:
        return 0.0
    if x == 0.0:
        return at if m2 == 0 else 0.0
    first = at
    for k in range(2, m2 + 2):
        first *= x / k
    return _tail(first, lambda k: x / (k + 1), m2 + 1)


def tail_bound(op_norm: float, normD: float, normC: float, ord: TaylorOrder, t: float) -> float:
    """A-priori bound on the truncation error.

    Valid in any norm for which ``||S^k(Y)|| <= op_norm^k ||Y||``; with the
    ``U,V`` norm and ``op_norm = max |alpha_i + beta_j|`` it is exact per
    eigen-coordinate.
    """
    at = abs(t)
    x = at * op_norm
    bound = 0.0
    if normD:
        bound += normD * _d_tail(x, ord.m1)
    if normC:
        bound += normC * _c_tail(at, x, ord.m2)
    return bound


def order_for_tolerance(op_norm: float, normD: float, normC: float, t: float, tol: float,
                        cap: int = ORDER_CAP) -> TaylorOrder:
    """Smallest orders found by bumping whichever series currently has the larger tail."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    at = abs(t)
    x = at * op_norm
    m1 = m2 = 0
    td = normD * _d_tail(x, m1) if normD else 0.0
    tc = normC * _c_tail(at, x, m2) if normC else 0.0
    while td + tc > tol:
        if td >= tc:
            m1 += 1
            td = normD * _d_tail(x, m1)
        else:
            m2 += 1
            tc = normC * _c_tail(at, x, m2)
        if m1 > cap or m2 > cap:
            raise SeriesTooLong(f"|t|*||S|| = {x:.3g} needs orders above {cap}")
    return TaylorOrder(m1, m2)


def solve_taylor(p: DseProblem, tol: float = 1e-12, relative: bool = True,
                 max_step_norm: float = 5.0) -> SolveReport:
    """Truncated series at every grid point with orders from :func:`order_for_tolerance`.

    With ``relative`` the tolerance is scaled by ``||D||_{U,V} + t ||C||_{U,V}``.
    If ``t_final * ||S||`` exceeds ``max_step_norm`` the series is restarted
    from the current state on substeps of length at most
    ``max_step_norm / ||S||``; otherwise each grid point is expanded from 0.
    ``residual_norms`` holds the summed a-priori tail bounds.
    """
    start = time.perf_counter()
    s = p.op.spectral
    opn = operator_norm(s)
    nC = norm_uv(s, p.C)

    def expand(X0, h):
        q = DseProblem(p.op, p.C, X0, [0.0], p.lyapunov)
        nD = norm_uv(s, X0)
        scale = (nD + abs(h) * nC) if relative else 1.0
        ord = order_for_tolerance(opn, nD, nC, h, tol * scale if scale else tol)
        return taylor_direct(q, ord, h), ord, tail_bound(opn, nD, nC, ord, h)

    snaps, res, orders = [], [], []
    marching = p.t_grid[-1] * opn > max_step_norm
    X, t_prev = p.D, 0.0
    for t in p.t_grid:
        if not marching:
            X, ord, bound = expand(p.D, t)
            orders.append((ord.m1, ord.m2))
        else:
            bound = 0.0
            span = t - t_prev
            nsub = max(1, int(np.ceil(span * opn / max_step_norm))) if span > 0 else 0
            worst = (0, 0)
            for _ in range(nsub):
                X, ord, b = expand(X, span / nsub)
                bound += b
                worst = max(worst, (ord.m1, ord.m2))
            orders.append(worst)
            t_prev = t
        snaps.append(X)
        res.append(bound)
    wall = time.perf_counter() - start
    return SolveReport(p.t_grid.copy(), snaps, "taylor", np.array(res), wall,
                       {"orders": orders, "marching": marching})
