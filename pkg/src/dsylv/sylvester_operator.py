"""The Sylvester operator ``S(X) = AX + XB`` and its spectral calculus.

With ``A = U diag(alpha) U^-1`` and ``B^H = V diag(conj(beta)) V^-1``, the
matrices ``u_i v_j^H`` are eigenvectors of ``S`` with eigenvalues
``alpha_i + beta_j`` and are orthonormal for the inner product
``<X, Y>_{U,V} = <U^-1 X V^-H, U^-1 Y V^-H>_F``.  Every function of ``S``
used here is a Hadamard mask applied in those coordinates.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularOperator
from .linalg_core import COND_CAP, as_matrix, eig

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralData:
    U: np.ndarray
    U_inv: np.ndarray
    alpha: np.ndarray
    V: np.ndarray
    V_inv: np.ndarray
    beta: np.ndarray

    @property
    def shape(self):
        return (self.alpha.size, self.beta.size)

    @property
    def eigensums(self) -> np.ndarray:
        """The n x m array of ``alpha_i + beta_j``."""
        return self.alpha[:, None] + self.beta[None, :]

    def coords(self, X) -> np.ndarray:
        """``U^-1 X V^-H``."""
        return self.U_inv @ X @ self.V_inv.conj().T

    def from_coords(self, W) -> np.ndarray:
        """``U W V^H``."""
        return self.U @ W @ self.V.conj().T

    def basis_element(self, i: int, j: int) -> np.ndarray:
        """``u_i v_j^H``."""
        return np.outer(self.U[:, i], self.V[:, j].conj())

    def condition(self) -> float:
        """cond(U) * cond(V); large values make the U,V norm far from Frobenius."""
        return float(np.linalg.cond(self.U) * np.linalg.cond(self.V))


def compute_spectral_data(A, B, cond_cap: float = COND_CAP) -> SpectralData:
    ea = eig(A, cond_cap)
    eb = eig(np.asarray(B).conj().T, cond_cap)
    return SpectralData(ea.eigenvectors, ea.inverse, ea.eigenvalues,
                        eb.eigenvectors, eb.inverse, eb.eigenvalues.conj())


class SylvesterOperator:
    """``X -> AX + XB`` on n x m matrices.

    Spectral data is computed on first access and cached; concurrent first
    accesses compute it once.
    """

    def __init__(self, A, B, spectral: SpectralData | None = None, cond_cap: float = COND_CAP):
        A = as_matrix(A, "A")
        B = as_matrix(B, "B")
        if A.shape[0] != A.shape[1] or B.shape[0] != B.shape[1]:
            raise DimensionMismatch(f"A {A.shape} and B {B.shape} must be square")
        self.A = A
        self.B = B
        self.cond_cap = cond_cap
        self._spectral = spectral
        self._lock = threading.Lock()

    @property
    def shape(self):
        return (self.A.shape[0], self.B.shape[0])

    @property
    def spectral(self) -> SpectralData:
        if self._spectral is None:
            with self._lock:
                if self._spectral is None:
                    self._spectral = compute_spectral_data(self.A, self.B, self.cond_cap)
        return self._spectral

    @property
    def has_spectral(self) -> bool:
        return self._spectral is not None

    def shifted(self, scale: float, shift: complex) -> "SylvesterOperator":
        """Operator for ``(scale*A - shift*I, scale*B - shift*I)``.

        ``scale`` must be real so that the eigenvectors (and cached spectral
        data) carry over unchanged.
        """
        n, m = self.shape
        A = scale * self.A - shift * np.eye(n)
        B = scale * self.B - shift * np.eye(m)
        spec = None
        if self._spectral is not None:
            s = self._spectral
            spec = SpectralData(s.U, s.U_inv, scale * s.alpha - shift,
                                s.V, s.V_inv, scale * s.beta - shift)
        return SylvesterOperator(A, B, spectral=spec, cond_cap=self.cond_cap)

    def __call__(self, X):
        return sylvester_apply(self, X)


def _check_shape(op_shape, X, name="X"):
    if X.shape != tuple(op_shape):
        raise DimensionMismatch(f"{name} has shape {X.shape}, expected {tuple(op_shape)}")


def sylvester_apply(op: SylvesterOperator, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.complex128)
    _check_shape(op.shape, X)
    return op.A @ X + X @ op.B


def split_apply(op: SylvesterOperator, X):
    """``(AX, XB)``, the two commuting halves of the operator."""
    X = np.asarray(X, dtype=np.complex128)
    _check_shape(op.shape, X)
    return op.A @ X, X @ op.B


def inner_product_uv(spec: SpectralData, X, Y) -> complex:
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    _check_shape(spec.shape, X)
    _check_shape(spec.shape, Y, "Y")
    return complex(np.vdot(spec.coords(Y), spec.coords(X)))


def norm_uv(spec: SpectralData, X) -> float:
    return float(np.linalg.norm(spec.coords(np.asarray(X, dtype=np.complex128))))


def adjoint_apply(op: SylvesterOperator, X) -> np.ndarray:
    """Adjoint of ``S`` with respect to ``<.,.>_{U,V}``:
    ``U conj(D_A) U^-1 X + X V^-H D_{B^H} V^H``.
    """
    X = np.asarray(X, dtype=np.complex128)
    _check_shape(op.shape, X)
    s = op.spectral
    left = (s.U * s.alpha.conj()) @ (s.U_inv @ X)
    right = (X @ s.V_inv.conj().T * s.beta.conj()) @ s.V.conj().T
    return left + right


def spectral_apply(spec: SpectralData, mask, X) -> np.ndarray:
    """``U (mask * (U^-1 X V^-H)) V^H``."""
    X = np.asarray(X, dtype=np.complex128)
    _check_shape(spec.shape, X)
    mask = np.asarray(mask)
    _check_shape(spec.shape, mask, "mask")
    return spec.from_coords(mask * spec.coords(X))


def operator_norm(spec: SpectralData) -> float:
    """Induced ``||.||_{U,V}`` norm: ``max |alpha_i + beta_j|``."""
    if spec.alpha.size == 0 or spec.beta.size == 0:
        return 0.0
    return float(np.max(np.abs(spec.eigensums)))


def argmax_eigensum(spec: SpectralData) -> tuple[int, int]:
    i, j = np.unravel_index(np.argmax(np.abs(spec.eigensums)), spec.shape)
    return int(i), int(j)


def exp_mask(spec: SpectralData, t: float) -> np.ndarray:
    return np.exp(t * spec.eigensums)


def inverse_mask(spec: SpectralData) -> np.ndarray:
    """``1 / (alpha_i + beta_j)``; raises :class:`SingularOperator` near zero sums."""
    sums = spec.eigensums
    tol = SINGULAR_RTOL * operator_norm(spec)
    small = np.abs(sums) <= tol
    if np.any(small):
        i, j = np.argwhere(small)[0]
        raise SingularOperator(
            f"|alpha_{i} + beta_{j}| = {abs(sums[i, j]):.3e} below {tol:.3e}")
    return 1.0 / sums


def inverse_apply(op: SylvesterOperator, X) -> np.ndarray:
    s = op.spectral
    return spectral_apply(s, inverse_mask(s), X)
