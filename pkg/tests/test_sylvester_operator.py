import numpy as np
import pytest

from dsylv.errors import DimensionMismatch, SingularOperator
from dsylv.linalg_core import expm, kron_oracle_apply
from dsylv.sylvester_operator import (
    SylvesterOperator,
    adjoint_apply,
    argmax_eigensum,
    compute_spectral_data,
    exp_mask,
    inner_product_uv,
    inverse_mask,
    norm_uv,
    operator_norm,
    spectral_apply,
    split_apply,
    sylvester_apply,
)

from conftest import diagonalizable, rand_complex, rel, stable_eigenvalues


def random_op(rng, n=4, m=3):
    A = diagonalizable(rng, rand_complex(rng, n))
    B = diagonalizable(rng, rand_complex(rng, m))
    return SylvesterOperator(A, B)


def test_apply_trivial(rng):
    B = rand_complex(rng, 3, 3)
    X = rand_complex(rng, 2, 3)
    np.testing.assert_allclose(sylvester_apply(SylvesterOperator(np.zeros((2, 2)), B), X), X @ B)
    assert sylvester_apply(SylvesterOperator([[2.0]], [[3.0]]), [[1.0]])[0, 0] == 5.0


@pytest.mark.parametrize("seed", range(10))
def test_apply_matches_kron(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 21, 2)
    A, B, X = rand_complex(rng, n, n), rand_complex(rng, m, m), rand_complex(rng, n, m)
    assert rel(sylvester_apply(SylvesterOperator(A, B), X), kron_oracle_apply(A, B, X)) <= 1e-13


def test_apply_dimension_mismatch(rng):
    op = random_op(rng)
    with pytest.raises(DimensionMismatch):
        sylvester_apply(op, np.ones((3, 3)))


def test_split(rng):
    op = random_op(rng)
    X = rand_complex(rng, 4, 3)
    H, V = split_apply(op, X)
    np.testing.assert_allclose(H + V, sylvester_apply(op, X), atol=1e-13)
    HV = op.A @ (X @ op.B)
    VH = (op.A @ X) @ op.B
    assert np.linalg.norm(HV - VH) / np.linalg.norm(X) <= 1e-13 * np.linalg.norm(op.A) * np.linalg.norm(op.B)
    Z = np.zeros((4, 3))
    assert not np.any(split_apply(op, Z)[0]) and not np.any(split_apply(op, Z)[1])
    I_op = SylvesterOperator(np.eye(4), np.eye(3))
    H, V = split_apply(I_op, X)
    np.testing.assert_array_equal(H, X)
    np.testing.assert_array_equal(V, X)


def test_spectral_data_invariants(rng):
    op = random_op(rng)
    s = op.spectral
    np.testing.assert_allclose(op.A @ s.U, s.U * s.alpha, atol=1e-11)
    np.testing.assert_allclose(op.B.conj().T @ s.V, s.V * s.beta.conj(), atol=1e-11)


def test_orthonormal_basis(rng):
    op = random_op(rng, 5, 4)
    s = op.spectral
    G = np.array([[inner_product_uv(s, s.basis_element(i, j), s.basis_element(k, l))
                   for k in range(5) for l in range(4)] for i in range(5) for j in range(4)])
    np.testing.assert_allclose(G, np.eye(20), atol=1e-12)


def test_inner_product_frobenius_when_identity(rng):
    s = compute_spectral_data(np.diag([1.0, 2.0, 3.0]), np.diag([4.0, 5.0]))
    X, Y = rand_complex(rng, 3, 2), rand_complex(rng, 3, 2)
    assert abs(inner_product_uv(s, X, Y) - np.sum(X * Y.conj())) <= 1e-14 * np.linalg.norm(X) * np.linalg.norm(Y)


def test_inner_product_axioms(rng):
    s = random_op(rng).spectral
    for _ in range(20):
        X, Y = rand_complex(rng, 4, 3), rand_complex(rng, 4, 3)
        assert inner_product_uv(s, X, X).real > 0
        assert abs(inner_product_uv(s, X, X).imag) <= 1e-12 * abs(inner_product_uv(s, X, X))
        assert abs(inner_product_uv(s, X, Y) - np.conj(inner_product_uv(s, Y, X))) <= 1e-12 * norm_uv(s, X) * norm_uv(s, Y)


def test_adjoint_hermitian_is_self_adjoint(rng):
    G, H = rand_complex(rng, 4, 4), rand_complex(rng, 3, 3)
    op = SylvesterOperator(G + G.conj().T, H + H.conj().T)
    X = rand_complex(rng, 4, 3)
    assert rel(adjoint_apply(op, X), sylvester_apply(op, X)) <= 1e-12


def test_adjoint_diagonal_case():
    op = SylvesterOperator([[1j]], [[2j]])
    assert abs(adjoint_apply(op, [[1.0]])[0, 0] - (-3j)) <= 1e-15


def test_adjoint_identity(rng):
    op = random_op(rng)
    s = op.spectral
    for _ in range(20):
        X, Y = rand_complex(rng, 4, 3), rand_complex(rng, 4, 3)
        lhs = inner_product_uv(s, sylvester_apply(op, X), Y)
        rhs = inner_product_uv(s, X, adjoint_apply(op, Y))
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_normality(rng):
    op = random_op(rng, 6, 5)
    X = rand_complex(rng, 6, 5)
    comm = sylvester_apply(op, adjoint_apply(op, X)) - adjoint_apply(op, sylvester_apply(op, X))
    assert np.linalg.norm(comm) <= 1e-11 * np.linalg.norm(X)


def test_eigen_action(rng):
    op = random_op(rng)
    s = op.spectral
    for i in range(4):
        for j in range(3):
            E = s.basis_element(i, j)
            assert rel(sylvester_apply(op, E), (s.alpha[i] + s.beta[j]) * E) <= 1e-11


def test_spectral_apply_masks(rng):
    op = random_op(rng)
    s = op.spectral
    X = rand_complex(rng, 4, 3)
    assert rel(spectral_apply(s, np.ones((4, 3)), X), X) <= 1e-12
    assert rel(spectral_apply(s, s.eigensums, X), sylvester_apply(op, X)) <= 1e-12
    t = 0.7
    assert rel(spectral_apply(s, exp_mask(s, t), X), expm(t * op.A) @ X @ expm(t * op.B)) <= 1e-10
    Y = spectral_apply(s, inverse_mask(s), X)
    assert rel(sylvester_apply(op, Y), X) <= 1e-11


def test_inverse_mask_singular():
    op = SylvesterOperator(np.diag([1.0, 2.0]), np.diag([-1.0, 5.0]))
    with pytest.raises(SingularOperator):
        inverse_mask(op.spectral)


def test_operator_norm_examples(rng):
    s = compute_spectral_data(np.diag([-1.0, -2.0]), np.diag([-3.0, -4.0]))
    assert operator_norm(s) == 6.0
    s = compute_spectral_data([[0.25 + 1j]], [[-3.0]])
    assert abs(operator_norm(s) - abs(0.25 + 1j - 3.0)) <= 1e-15


def test_operator_norm_dominates_and_is_attained(rng):
    A = diagonalizable(rng, rand_complex(rng, 4))
    B = diagonalizable(rng, rand_complex(rng, 3))
    op = SylvesterOperator(A, B)
    s = op.spectral
    nrm = operator_norm(s)
    for _ in range(100):
        X = rand_complex(rng, 4, 3)
        assert norm_uv(s, sylvester_apply(op, X)) <= nrm * norm_uv(s, X) * (1 + 1e-12)
    i, j = argmax_eigensum(s)
    E = s.basis_element(i, j)
    assert abs(norm_uv(s, sylvester_apply(op, E)) / norm_uv(s, E) - nrm) <= 1e-11 * nrm


def test_shifted_reuses_spectral(rng):
    op = random_op(rng)
    op.spectral
    sh = op.shifted(0.3, 0.5)
    assert sh.has_spectral
    fresh = compute_spectral_data(sh.A, sh.B)
    np.testing.assert_allclose(np.sort_complex(sh.spectral.alpha), np.sort_complex(fresh.alpha), atol=1e-12)
    X = rand_complex(rng, 4, 3)
    assert rel(spectral_apply(sh.spectral, sh.spectral.eigensums, X), sylvester_apply(sh, X)) <= 1e-12


def test_lazy_spectral_computed_once(rng):
    from concurrent.futures import ThreadPoolExecutor
    op = random_op(rng)
    with ThreadPoolExecutor(4) as pool:
        results = list(pool.map(lambda _: op.spectral, range(8)))
    assert all(r is results[0] for r in results)
