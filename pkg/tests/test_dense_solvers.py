import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsylv.dense_solvers import (
    DseProblem,
    phi1,
    solve_algebraic,
    solve_expm_direct,
    solve_spectral,
    solve_voc_split,
)
from dsylv.errors import DimensionMismatch, SingularOperator
from dsylv.sylvester_operator import SylvesterOperator, sylvester_apply

from conftest import diagonalizable, rand_complex, random_problem, rel

SOLVERS = [solve_spectral, solve_voc_split, solve_expm_direct]


def rk4(f, y0, t_end, steps):
    y, h = np.array(y0, dtype=complex), t_end / steps
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_rk4_oracle_scalar():
    # X' = -2X + 2, X(0) = 0 at t = 1; value frozen from rk4 with 2000 steps
    y = rk4(lambda x: -2 * x + 2, [[0.0]], 1.0, 2000)[0, 0]
    assert abs(y - 0.8646647167633873) <= 1e-12


@pytest.mark.parametrize("solver", SOLVERS)
def test_scalar_example(solver):
    p = DseProblem.from_matrices([[-1.0]], [[-1.0]], [[2.0]], [[0.0]], [0.0, 1.0])
    X = solver(p).snapshots[-1][0, 0]
    assert abs(X - 0.8646647167633873) <= 1e-12


@pytest.mark.parametrize("solver", [solve_spectral, solve_expm_direct])
def test_zero_problem(solver):
    p = DseProblem.from_matrices(np.zeros((2, 2)), np.zeros((3, 3)), np.zeros((2, 3)), np.zeros((2, 3)), [0.0, 1.0])
    for X in solver(p).snapshots:
        assert not np.any(X)


@pytest.mark.parametrize("solver", SOLVERS)
def test_initial_condition_bitwise(solver, rng):
    p = random_problem(rng, 6, 4)
    X0 = solver(p).snapshots[0]
    assert np.linalg.norm(X0 - p.D) <= 1e-12 * np.linalg.norm(p.D)


@pytest.mark.parametrize("seed", range(5))
def test_solvers_agree_with_rk4(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, 5, 4, t_grid=[0.0, 1.0])
    ref = rk4(p.rhs, p.D, 1.0, 4000)
    for solver in SOLVERS:
        assert rel(solver(p).snapshots[-1], ref) <= 1e-10


@pytest.mark.parametrize("solver", SOLVERS)
def test_residual_field_small(solver, rng):
    p = random_problem(rng, 8, 7)
    r = solver(p)
    assert np.all(r.residual_norms <= 1e-10 * (1 + np.linalg.norm(p.D)))
    assert r.wall_time >= 0 and len(r.snapshots) == len(p.t_grid)


def test_homogeneous_diagonal_commuting():
    A = np.diag([-1.0, -2.0, -0.5])
    B = np.diag([-0.3, -4.0])
    D = np.arange(1.0, 7.0).reshape(3, 2)
    p = DseProblem.from_matrices(A, B, np.zeros((3, 2)), D, [0.0, 0.7])
    exact = np.exp(0.7 * (np.diag(A)[:, None] + np.diag(B)[None, :])) * D
    for solver in SOLVERS:
        assert rel(solver(p).snapshots[-1], exact) <= 1e-14


def test_voc_singular_raises():
    p = DseProblem.from_matrices([[1j]], [[-1j]], [[1.0]], [[0.0]], [0.0, 1.0])
    with pytest.raises(SingularOperator):
        solve_voc_split(p)


def test_singular_handled_by_spectral_and_expm():
    # alpha + beta = 0: X(t) = D + t C
    p = DseProblem.from_matrices([[1j]], [[-1j]], [[1.0]], [[2.0]], [0.0, 1.5])
    for solver in (solve_spectral, solve_expm_direct):
        assert abs(solver(p).snapshots[-1][0, 0] - 3.5) <= 1e-12


def test_phi_switch_continuity():
    for t in (1e-3, 1.0, 10.0):
        s = np.array([1e-8 / t * (1 - 1e-6), 1e-8 / t * (1 + 1e-6)])
        v = phi1(s, t)
        assert abs(v[0] - v[1]) <= 1e-13 * abs(v[0]) + 2e-6 * 1e-8 * t
    assert phi1(np.array([0.0]), 2.0)[0] == 2.0


def test_phi_tiny_arguments():
    s = np.array([1e-30, -1e-20, 1e-12j])
    np.testing.assert_allclose(phi1(s, 1.0), np.ones(3), rtol=1e-11)


def test_phi_against_expm1():
    s = np.array([-1.0, 2.0 + 1j, -1e-6, 3e-5])
    t = 0.9
    np.testing.assert_allclose(phi1(s, t), np.expm1(t * s) / s, rtol=1e-14)


def test_algebraic_solve(rng):
    op = SylvesterOperator(diagonalizable(rng, -1 - rng.random(5)), diagonalizable(rng, -1 - rng.random(4)))
    C = rand_complex(rng, 5, 4)
    X = solve_algebraic(op, C)
    assert np.linalg.norm(sylvester_apply(op, X) + C) <= 1e-12 * np.linalg.norm(C)


def test_problem_validation():
    with pytest.raises(DimensionMismatch):
        DseProblem.from_matrices(np.eye(2), np.eye(3), np.zeros((2, 2)), np.zeros((2, 3)), [0.0])
    with pytest.raises(ValueError):
        DseProblem.from_matrices(np.eye(2), np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), [0.5, 1.0])
    with pytest.raises(ValueError):
        DseProblem.from_matrices(np.eye(2), np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), [0.0, 1.0, 1.0])


def test_lyapunov_snapshots_hermitian(rng):
    p = random_problem(rng, 6, 6, lyapunov=True)
    for solver in SOLVERS:
        for X in solver(p).snapshots:
            assert np.array_equal(X, X.conj().T)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), m=st.integers(1, 6),
       t=st.floats(0.01, 2.0))
def test_superposition(seed, n, m, t):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, n, m, t_grid=[0.0, t])
    hom = DseProblem(p.op, np.zeros_like(p.C), p.D, p.t_grid)
    inh = DseProblem(p.op, p.C, np.zeros_like(p.D), p.t_grid)
    X = solve_spectral(p).snapshots[-1]
    Y = solve_spectral(hom).snapshots[-1] + solve_spectral(inh).snapshots[-1]
    assert np.linalg.norm(X - Y) <= 1e-12 * (1 + np.linalg.norm(X))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.05, 1.0), u=st.floats(0.05, 1.0))
def test_semigroup_restart(seed, s, u):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, 4, 3, t_grid=[0.0, s, s + u])
    full = solve_spectral(p).snapshots
    restart = solve_spectral(DseProblem(p.op, p.C, full[1], [0.0, u])).snapshots[-1]
    assert rel(restart, full[2]) <= 1e-10
