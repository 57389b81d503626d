import numpy as np
import pytest

from dsylv.dense_solvers import DseProblem


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def diagonalizable(rng, eigenvalues, spread=0.3):
    """``P diag(eigenvalues) P^-1`` with a well-conditioned random P."""
    n = len(eigenvalues)
    P = np.eye(n) + spread * rand_complex(rng, n, n) / np.sqrt(n)
    return P @ np.diag(eigenvalues) @ np.linalg.inv(P)


def stable_eigenvalues(rng, n, re=(-2.0, -0.1), im=0.5):
    return rng.uniform(*re, n) + 1j * rng.uniform(-im, im, n)


def random_problem(rng, n, m, t_grid=(0.0, 0.5, 1.0), lyapunov=False):
    A = diagonalizable(rng, stable_eigenvalues(rng, n))
    if lyapunov:
        B = A.conj().T
        C1 = rand_complex(rng, n, 2)
        D1 = rand_complex(rng, n, 2)
        C, D = C1 @ C1.conj().T, D1 @ D1.conj().T
    else:
        B = diagonalizable(rng, stable_eigenvalues(rng, m))
        C, D = rand_complex(rng, n, m), rand_complex(rng, n, m)
    return DseProblem.from_matrices(A, B, C, D, t_grid, lyapunov=lyapunov)


def rel(X, Y):
    return np.linalg.norm(X - Y) / np.linalg.norm(Y)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def report_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((number, f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
