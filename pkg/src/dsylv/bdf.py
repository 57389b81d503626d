"""Fixed-step BDF(1..6) for ``X' = AX + XB + C``.

A step solves ``sum_j alpha_j X_{n-j} = h beta (S(X_n) + C)`` with
``alpha_0 = 1``.  Moving ``X_n`` to one side gives the algebraic Sylvester
equation

    (h beta A - I/2) X_n + X_n (h beta B - I/2) + RHS = 0,
    RHS = -sum_{j>=1} alpha_j X_{n-j} + h beta C,

which reuses the spectral inverse of the shifted operator.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .dense_solvers import DseProblem, SolveReport, hermitian_part, solve_algebraic, solve_spectral
from .errors import DimensionMismatch
from .sylvester_operator import SylvesterOperator, sylvester_apply

MAX_ORDER = 6
STARTUPS = ("ramp", "exact")


@dataclass(frozen=True)
class BdfConfig:
    order: int
    step_size: float
    startup: str = "ramp"

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise ValueError(f"BDF order must be in [1, {MAX_ORDER}], got {self.order}")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.startup not in STARTUPS:
            raise ValueError(f"startup must be one of {STARTUPS}")


def bdf_coefficients_exact(order: int) -> tuple[list[Fraction], Fraction]:
    """Rational coefficients from ``sum_{k=1}^p (1/k) nabla^k X_n = h F_n``."""
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"BDF order must be in [1, {MAX_ORDER}], got {order}")
    raw = [Fraction(0)] * (order + 1)
    for k in range(1, order + 1):
        for j in range(k + 1):
            raw[j] += Fraction((-1) ** j * comb(k, j), k)
    lead = raw[0]
    return [a / lead for a in raw], 1 / lead


def bdf_coefficients(order: int) -> tuple[np.ndarray, float]:
    """``(alpha, beta)`` with ``alpha[0] = 1``."""
    alpha, beta = bdf_coefficients_exact(order)
    return np.array([float(a) for a in alpha]), float(beta)


def shifted_operator(op: SylvesterOperator, cfg: BdfConfig, order: int | None = None) -> SylvesterOperator:
    _, beta = bdf_coefficients(order or cfg.order)
    return op.shifted(cfg.step_size * beta, 0.5)


def bdf_step(op: SylvesterOperator, C, history, cfg: BdfConfig, order: int | None = None,
             shifted: SylvesterOperator | None = None) -> np.ndarray:
    """One implicit step.  ``history`` holds the previous snapshots, most recent
    first; only the first ``order`` are used.
    """
    p = order or cfg.order
    if len(history) < p:
        raise ValueError(f"BDF{p} needs {p} previous snapshots, got {len(history)}")
    alpha, beta = bdf_coefficients(p)
    C = np.asarray(C, dtype=np.complex128)
    if C.shape != op.shape:
        raise DimensionMismatch(f"C has shape {C.shape}, expected {op.shape}")
    rhs = (cfg.step_size * beta) * C
    for j in range(1, p + 1):
        rhs = rhs - alpha[j] * history[j - 1]
    if shifted is None:
        shifted = op.shifted(cfg.step_size * beta, 0.5)
    return solve_algebraic(shifted, rhs)


def _grid_steps(t_grid, h) -> np.ndarray:
    steps = np.rint(np.asarray(t_grid) / h).astype(int)
    if np.any(np.abs(steps * h - t_grid) > 1e-9 * max(1.0, float(t_grid[-1]))):
        raise ValueError(f"step size {h} does not divide the time grid")
    return steps


def bdf_integrate(p: DseProblem, cfg: BdfConfig) -> SolveReport:
    """Integrate to the end of ``p.t_grid`` with constant step ``cfg.step_size``.

    ``startup="ramp"`` uses BDF1, ..., BDF(order-1) for the first steps;
    ``startup="exact"`` seeds the first ``order - 1`` steps from the closed
    form spectral solution.  ``residual_norms`` holds, per snapshot, the
    largest algebraic residual of the implicit solves since the previous one.
    """
    start = time.perf_counter()
    h = cfg.step_size
    targets = _grid_steps(p.t_grid, h)
    n_steps = int(targets[-1])
    p.op.spectral  # shifted operators reuse these eigenvectors
    shifted = {}

    def op_for(order):
        if order not in shifted:
            shifted[order] = shifted_operator(p.op, cfg, order)
        return shifted[order]

    exact = None
    if cfg.startup == "exact" and cfg.order > 1:
        boot = np.arange(min(cfg.order, n_steps + 1)) * h
        exact = solve_spectral(DseProblem(p.op, p.C, p.D, boot, p.lyapunov)).snapshots

    wanted = set(int(k) for k in targets)
    history = [p.D.copy()]  # most recent first
    snaps = {0: p.D.copy()}
    res = {0: 0.0}
    worst = 0.0
    for k in range(1, n_steps + 1):
        if exact is not None and k < cfg.order:
            X = exact[k]
        else:
            order = min(cfg.order, k)
            alpha, beta = bdf_coefficients(order)
            X = bdf_step(p.op, p.C, history, cfg, order=order, shifted=op_for(order))
            lhs = X - (h * beta) * (sylvester_apply(p.op, X) + p.C)
            for j in range(1, order + 1):
                lhs = lhs + alpha[j] * history[j - 1]
            worst = max(worst, float(np.linalg.norm(lhs)))
        if p.lyapunov:
            X = hermitian_part(X)
        history.insert(0, X)
        del history[cfg.order:]
        if k in wanted:
            snaps[k] = X
            res[k] = worst
            worst = 0.0

    out = [snaps[int(k)] for k in targets]
    res = np.array([res[int(k)] for k in targets])
    wall = time.perf_counter() - start
    return SolveReport(p.t_grid.copy(), out, f"bdf{cfg.order}", res, wall,
                       {"steps": n_steps, "step_size": h, "startup": cfg.startup})
