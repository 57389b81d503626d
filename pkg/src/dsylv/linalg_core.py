"""Dense complex linear algebra used by every solver.

Dense matrices are plain ``numpy`` arrays of dtype ``complex128``;
:func:`as_matrix` is the validating constructor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotDiagonalizable

COND_CAP = 1e8

# Pade(13) coefficients and the scaling threshold for order 13 (Higham 2005).
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
THETA13 = 5.371920351148152


def as_matrix(M, name="matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D complex array."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _require_square(M, name):
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")


def is_diagonal(M) -> bool:
    return np.count_nonzero(M - np.diag(np.diagonal(M))) == 0


@dataclass(frozen=True)
class EigenDecomposition:
    """``M = eigenvectors @ diag(eigenvalues) @ inverse``."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    inverse: np.ndarray

    @property
    def cond(self) -> float:
        return float(np.linalg.norm(self.eigenvectors, 2) * np.linalg.norm(self.inverse, 2))

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.inverse


SORT_RTOL = 1e-10


def _sort_order(w) -> np.ndarray:
    """Sort by real then imaginary part; parts within round-off count as equal."""
    scale = SORT_RTOL * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    # lexsort is stable, so ties keep their original order
    return np.lexsort((np.round(w.imag / scale), np.round(w.real / scale)))


def eig(M, cond_cap: float = COND_CAP) -> EigenDecomposition:
    """Eigendecomposition with eigenvalues sorted by real, then imaginary part.

    Exactly Hermitian input goes through ``eigh`` so the eigenvector matrix
    is unitary.  Raises :class:`NotDiagonalizable` when the condition number
    of the eigenvector matrix exceeds ``cond_cap``.
    """
    M = as_matrix(M)
    _require_square(M, "M")
    n = M.shape[0]
    if is_diagonal(M):
        w = np.diagonal(M).copy()
        U = np.eye(n, dtype=np.complex128)
        order = _sort_order(w)
        return EigenDecomposition(U[:, order], w[order], U[order, :])
    if np.array_equal(M, M.conj().T):
        w, U = np.linalg.eigh(M)
        w = w.astype(np.complex128)
        U = U.astype(np.complex128)
        Uinv = U.conj().T
    else:
        w, U = np.linalg.eig(M)
        cond = np.linalg.cond(U)
        if not np.isfinite(cond) or cond > cond_cap:
            raise NotDiagonalizable(f"eigenvector condition number {cond:.3e} exceeds {cond_cap:.1e}")
        Uinv = np.linalg.inv(U)
    order = _sort_order(w)
    return EigenDecomposition(U[:, order], w[order], Uinv[order, :])


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a fixed Pade(13) approximant."""
    M = as_matrix(M)
    _require_square(M, "M")
    n = M.shape[0]
    if is_diagonal(M):
        return np.diag(np.exp(np.diagonal(M)))
    norm1 = np.linalg.norm(M, 1)
    s = max(0, int(np.ceil(np.log2(norm1 / THETA13)))) if norm1 > THETA13 else 0
    X = M / 2.0**s
    b = _PADE13
    ident = np.eye(n, dtype=np.complex128)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
         + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def vec(X) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(x, n: int, m: int) -> np.ndarray:
    return np.asarray(x).reshape((n, m), order="F")


def kron_operator(A, B) -> np.ndarray:
    """The nm x nm matrix ``I_m (x) A + B^T (x) I_n`` acting on ``vec(X)``."""
    n, m = A.shape[0], B.shape[0]
    return np.kron(np.eye(m), A) + np.kron(B.T, np.eye(n))


def kron_oracle_apply(A, B, X) -> np.ndarray:
    """Brute-force ``AX + XB`` through the Kronecker vec form."""
    A, B, X = as_matrix(A, "A"), as_matrix(B, "B"), as_matrix(X, "X")
    _require_square(A, "A")
    _require_square(B, "B")
    n, m = A.shape[0], B.shape[0]
    if X.shape != (n, m):
        raise DimensionMismatch(f"X has shape {X.shape}, expected {(n, m)}")
    return unvec(kron_operator(A, B) @ vec(X), n, m)


@dataclass(frozen=True)
class FactoredMatrix:
    """Low-rank matrix ``F1 @ F2^H`` with F1 of shape (n, r) and F2 of shape (m, r)."""

    F1: np.ndarray
    F2: np.ndarray

    def __post_init__(self):
        F1 = as_matrix(self.F1, "F1")
        F2 = as_matrix(self.F2, "F2")
        if F1.shape[1] != F2.shape[1]:
            raise DimensionMismatch(f"factor ranks differ: {F1.shape[1]} vs {F2.shape[1]}")
        object.__setattr__(self, "F1", F1)
        object.__setattr__(self, "F2", F2)

    @classmethod
    def zeros(cls, n: int, m: int) -> "FactoredMatrix":
        return cls(np.zeros((n, 0)), np.zeros((m, 0)))

    @property
    def shape(self):
        return (self.F1.shape[0], self.F2.shape[0])

    @property
    def rank(self) -> int:
        return self.F1.shape[1]

    def dense(self) -> np.ndarray:
        return self.F1 @ self.F2.conj().T

    def fro_norm(self) -> float:
        """Frobenius norm without forming the product."""
        if self.rank == 0:
            return 0.0
        G = (self.F1.conj().T @ self.F1) * (self.F2.conj().T @ self.F2).T
        return float(np.sqrt(max(np.real(G.sum()), 0.0)))
