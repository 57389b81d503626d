"""Galerkin projection onto block Krylov spaces for large differential
Sylvester and Lyapunov equations.

The truncated Taylor sum of the solution in factored form lives in
``span[D1, C1, A D1, A C1, ...] x span[D2, C2, B^H D2, B^H C2, ...]``, so
those two block Krylov spaces are used as left and right projection spaces.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dense_solvers import DseProblem, SolveReport, hermitian_part, solve_expm_direct, solve_spectral
from .errors import DimensionMismatch, NoConvergence, NotDiagonalizable, ZeroSeed
from .linalg_core import FactoredMatrix, as_matrix

DEFLATION_RTOL = 1e-12
_REORTH_PASSES = 2


def as_sparse(A) -> sp.csr_matrix:
    """Coordinate/CSR sparse matrix with duplicates summed."""
    M = sp.csr_matrix(A, dtype=np.complex128)
    M.sum_duplicates()
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {M.shape}")
    return M


@dataclass
class KrylovBasis:
    Q: np.ndarray           # n x k, orthonormal columns
    H_proj: np.ndarray      # Q^H A Q
    AQ: np.ndarray          # A Q, kept for cheap residuals and extension
    block_width: int        # width of the last accepted block
    order: int              # number of block steps taken after the seed

    @property
    def dim(self) -> int:
        return self.Q.shape[1]

    @property
    def exhausted(self) -> bool:
        """True once the space is invariant (last block fully deflated)."""
        return self.block_width == 0

    def last_block(self) -> np.ndarray:
        return self.Q[:, self.dim - self.block_width:]


def _orthonormalize(Q: np.ndarray, W: np.ndarray, floors) -> np.ndarray:
    """Orthonormalize the columns of W against Q and against each other.

    Block Gram-Schmidt against Q followed by column-wise modified
    Gram-Schmidt, each done twice.  Column j is dropped when its norm after
    orthogonalization is at most ``floors[j]``.
    """
    W = W.copy()
    if Q.shape[1]:
        for _ in range(_REORTH_PASSES):
            W -= Q @ (Q.conj().T @ W)
    kept = []
    for j in range(W.shape[1]):
        w = W[:, j]
        for _ in range(_REORTH_PASSES):
            for q in kept:
                w -= np.vdot(q, w) * q
            if Q.shape[1]:
                w -= Q @ (Q.conj().T @ w)
        nrm = np.linalg.norm(w)
        if nrm > floors[j]:
            kept.append(w / nrm)
    if not kept:
        return np.zeros((W.shape[0], 0), dtype=np.complex128)
    return np.column_stack(kept)


def start_basis(A, seed) -> KrylovBasis:
    """Orthonormalized seed block (order 0)."""
    A = as_sparse(A) if sp.issparse(A) else as_matrix(A, "A")
    seed = as_matrix(seed, "seed")
    if seed.shape[0] != A.shape[0] or seed.shape[1] < 1:
        raise DimensionMismatch(f"seed has shape {seed.shape}, A is {A.shape}")
    scale = np.linalg.norm(seed)
    if scale == 0.0:
        raise ZeroSeed("seed block is zero")
    empty = np.zeros((A.shape[0], 0), dtype=np.complex128)
    Q = _orthonormalize(empty, seed, np.full(seed.shape[1], DEFLATION_RTOL * scale))
    if Q.shape[1] == 0:
        raise ZeroSeed("seed block is numerically zero")
    AQ = np.asarray(A @ Q)
    return KrylovBasis(Q, Q.conj().T @ AQ, AQ, Q.shape[1], 0)


def extend_basis(A, basis: KrylovBasis) -> KrylovBasis:
    """One block Arnoldi step: orthogonalize A times the last block."""
    if basis.exhausted:
        return basis
    k0 = basis.dim - basis.block_width
    W = basis.AQ[:, k0:]
    floors = DEFLATION_RTOL * np.linalg.norm(W, axis=0)
    new = _orthonormalize(basis.Q, W, floors)
    if new.shape[1] == 0:
        return KrylovBasis(basis.Q, basis.H_proj, basis.AQ, 0, basis.order + 1)
    A_new = np.asarray(A @ new)
    Q = np.hstack([basis.Q, new])
    AQ = np.hstack([basis.AQ, A_new])
    k = basis.dim
    H = np.zeros((Q.shape[1], Q.shape[1]), dtype=np.complex128)
    H[:k, :k] = basis.H_proj
    H[:k, k:] = basis.Q.conj().T @ A_new
    H[k:, :] = new.conj().T @ AQ
    return KrylovBasis(Q, H, AQ, new.shape[1], basis.order + 1)


def block_arnoldi(A, seed, steps: int) -> KrylovBasis:
    """Orthonormal basis of ``span{seed, A seed, ..., A^steps seed}``.

    Columns whose norm after orthogonalization falls below 1e-12 of their
    norm before it are deflated; an invariant subspace stops the recurrence.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    A = as_sparse(A) if sp.issparse(A) else as_matrix(A, "A")
    basis = start_basis(A, seed)
    for _ in range(steps):
        if basis.exhausted:
            break
        basis = extend_basis(A, basis)
    return basis


def residual_estimate(A, B, basisA: KrylovBasis, basisB: KrylovBasis, Y, C: FactoredMatrix, t: float = 0.0) -> float:
    """Frobenius norm of ``A X + X B + C - X'`` for ``X = Q_A Y Q_B^H``, with
    ``X'`` taken from the projected equation.

    Writing ``W_A = A Q_A - Q_A A_k`` and ``W_B = B^H Q_B - Q_B B_k^H`` the
    residual is ``W_A Y Q_B^H + Q_A Y W_B^H + C1 C2^H - (P_A C1)(P_B C2)^H``:
    a product of thin factors, whose norm is computed from their QR factors.
    ``t`` is accepted for interface symmetry; the residual only depends on Y.
    """
    QA, QB = basisA.Q, basisB.Q
    Y = np.asarray(Y, dtype=np.complex128)
    WA = basisA.AQ - QA @ basisA.H_proj
    WB = basisB.AQ - QB @ basisB.H_proj
    c1 = QA.conj().T @ C.F1
    c2 = QB.conj().T @ C.F2
    kA, kB, r = QA.shape[1], QB.shape[1], C.rank
    L = np.hstack([WA, QA, C.F1, QA @ c1])
    R = np.hstack([QB, WB, C.F2, QB @ c2])
    M = np.zeros((L.shape[1], R.shape[1]), dtype=np.complex128)
    M[:kA, :kB] = Y
    M[kA:2 * kA, kB:2 * kB] = Y
    o1, o2 = 2 * kA, 2 * kB
    M[o1:o1 + r, o2:o2 + r] = np.eye(r)
    M[o1 + r:, o2 + r:] = -np.eye(r)
    _, RL = np.linalg.qr(L)
    _, RR = np.linalg.qr(R)
    return float(np.linalg.norm(RL @ M @ RR.conj().T))


def dense_residual(A, B, X, C, Xdot) -> float:
    """Brute-force ``||A X + X B + C - X'||_F`` (test oracle)."""
    return float(np.linalg.norm(A @ X + X @ B + C - Xdot))


def _project(F: FactoredMatrix, QA, QB) -> np.ndarray:
    return (QA.conj().T @ F.F1) @ (QB.conj().T @ F.F2).conj().T


def _solve_small(Ak, Bk, Ck, Dk, t_grid, lyapunov):
    p = DseProblem.from_matrices(Ak, Bk, Ck, Dk, t_grid, lyapunov=lyapunov)
    try:
        return solve_spectral(p)
    except NotDiagonalizable:
        return solve_expm_direct(p)


def _is_hermitian(A) -> bool:
    D = A - A.conj().T
    return (D.count_nonzero() == 0) if sp.issparse(D) else not np.any(D)


def _stack_seed(*factors):
    cols = [F for F in factors if F.shape[1]]
    return np.hstack(cols) if cols else None


def solve_projected_dse(A, B, C: FactoredMatrix, D: FactoredMatrix, t_grid, tol: float = 1e-8,
                        max_order: int = 200, lyapunov: bool = False, raise_on_fail: bool = False) -> SolveReport:
    """Project, solve with the dense spectral formula, lift back.

    The Krylov order grows by one block step until the residual of the lifted
    solution, maximized over the grid, is below ``tol * scale`` with
    ``scale = ||C||_F + ||D||_F ||A||_1``.  In Lyapunov mode ``B = A^H`` and
    a single basis serves both sides.  Snapshots are stored as factors
    ``(Q_A Y, Q_B)``.

    On non-convergence returns the last iterate with ``info["converged"]``
    false, or raises :class:`NoConvergence` carrying it when
    ``raise_on_fail`` is set.
    """
    start = time.perf_counter()
    A = as_sparse(A) if sp.issparse(A) else as_matrix(A, "A")
    t_grid = np.asarray(t_grid, dtype=float)
    if lyapunov:
        B = A.conj().T
    else:
        B = as_sparse(B) if sp.issparse(B) else as_matrix(B, "B")
    n, m = A.shape[0], B.shape[0]
    if C.shape != (n, m) or D.shape != (n, m):
        raise DimensionMismatch(f"C {C.shape} / D {D.shape} do not match {(n, m)}")

    if C.rank == 0 and D.rank == 0 or (C.fro_norm() == 0.0 and D.fro_norm() == 0.0):
        zero = FactoredMatrix.zeros(n, m)
        return SolveReport(t_grid.copy(), [zero] * len(t_grid), "krylov", np.zeros(len(t_grid)),
                           time.perf_counter() - start,
                           {"converged": True, "iterations": 0, "dim_left": 0, "dim_right": 0, "history": []})

    BH = B.conj().T
    norm_a1 = float(abs(A).sum(axis=0).max()) if sp.issparse(A) else float(np.linalg.norm(A, 1))
    scale = C.fro_norm() + D.fro_norm() * norm_a1
    threshold = tol * scale

    if lyapunov:
        seedA = _stack_seed(D.F1, C.F1, D.F2, C.F2)
        basisA = start_basis(A, seedA)
        basisB = basisA
    else:
        basisA = start_basis(A, _stack_seed(D.F1, C.F1))
        basisB = start_basis(BH, _stack_seed(D.F2, C.F2))

    # keep the projected matrix exactly Hermitian so the small solve is unitary
    hermitian = lyapunov and _is_hermitian(A)
    history = []
    converged = False
    iterations = 0
    while True:
        QA, QB = basisA.Q, basisB.Q
        Ak = hermitian_part(basisA.H_proj) if hermitian else basisA.H_proj
        Bk = Ak.conj().T if lyapunov else basisB.H_proj.conj().T
        small = _solve_small(Ak, Bk, _project(C, QA, QB), _project(D, QA, QB), t_grid, lyapunov)
        res = np.array([residual_estimate(A, B, basisA, basisB, Y, C, t)
                        for Y, t in zip(small.snapshots, t_grid)])
        history.append({"order": basisA.order, "dim_left": basisA.dim, "dim_right": basisB.dim,
                        "residual": float(res.max())})
        iterations += 1
        if res.max() <= threshold:
            converged = True
            break
        exhausted = basisA.exhausted and basisB.exhausted
        if basisA.order >= max_order or exhausted:
            break
        basisA = extend_basis(A, basisA)
        basisB = basisA if lyapunov else extend_basis(BH, basisB)

    snaps = []
    for Y in small.snapshots:
        Y = hermitian_part(Y) if lyapunov else Y
        snaps.append(FactoredMatrix(QA @ Y, QB))
    info = {"converged": converged, "iterations": iterations, "dim_left": basisA.dim,
            "dim_right": basisB.dim, "order": basisA.order, "history": history,
            "threshold": threshold, "basisA": basisA, "basisB": basisB,
            "projected": small.snapshots}
    report = SolveReport(t_grid.copy(), snaps, "krylov", res, time.perf_counter() - start, info)
    if not converged and raise_on_fail:
        raise NoConvergence(f"residual {res.max():.3e} above {threshold:.3e} at order {basisA.order}", report)
    return report
