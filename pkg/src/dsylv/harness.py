"""Problem generators, method registry, and error-versus-reference benchmarks."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .bdf import BdfConfig, bdf_integrate
from .dense_solvers import DseProblem, SolveReport, solve_expm_direct, solve_spectral, solve_voc_split
from .errors import ReferenceInfeasible
from .io import read_matrix_market
from .krylov_projection import solve_projected_dse
from .linalg_core import FactoredMatrix
from .taylor import solve_taylor

GENERATORS = ("laplacian_1d", "laplacian_2d", "diagonal", "matrix_market")
DENSE_CAP = 250_000
CSV_HEADER = ["method", "snapshot_index", "t", "rel_error_fro", "residual", "wall_time_s", "dim_or_order"]

# final-time relative Frobenius error each method is expected to reach
DEFAULT_TOLERANCES = {
    "spectral": 1e-12,
    "voc_split": 1e-9,
    "expm_direct": 1e-9,
    "taylor": 1e-9,
    "krylov": 1e-8,
    **{f"bdf{p}": 1e-3 for p in range(1, 7)},
}


@dataclass
class ProblemSpec:
    generator: str = "laplacian_1d"
    n: int = 50
    m: int | None = None
    rhs_rank: int = 1
    init_rank: int = 0
    stability_shift: float = 0.0
    lyapunov_mode: bool = True
    t_final: float = 0.1
    num_snapshots: int = 5
    seed: int = 0
    matrix_a: str | None = None
    matrix_b: str | None = None

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {GENERATORS}")
        if self.m is None:
            self.m = self.n
        if self.n < 1 or self.m < 1:
            raise ValueError("sizes must be positive")
        if self.rhs_rank < 0 or self.init_rank < 0:
            raise ValueError("ranks must be nonnegative")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.num_snapshots < 1:
            raise ValueError("num_snapshots must be at least 1")
        if self.lyapunov_mode and self.m != self.n:
            raise ValueError("lyapunov_mode needs m == n")
        if self.generator == "laplacian_2d":
            for size in (self.n, self.m):
                if round(size ** 0.5) ** 2 != size:
                    raise ValueError("laplacian_2d needs square sizes")

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown problem fields: {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def t_grid(self) -> np.ndarray:
        if self.num_snapshots == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.t_final, self.num_snapshots)


@dataclass
class Problem:
    spec: ProblemSpec
    A: object          # scipy sparse or dense ndarray
    B: object
    C: FactoredMatrix
    D: FactoredMatrix

    @property
    def lyapunov(self) -> bool:
        return self.spec.lyapunov_mode

    @property
    def t_grid(self) -> np.ndarray:
        return self.spec.t_grid

    def dense(self) -> DseProblem:
        def full(M):
            return M.toarray() if sp.issparse(M) else np.asarray(M)
        return DseProblem.from_matrices(full(self.A), full(self.B), self.C.dense(), self.D.dense(),
                                        self.t_grid, lyapunov=self.lyapunov)


def laplacian_1d(n: int) -> sp.csr_matrix:
    """``tridiag(1, -2, 1) / h^2`` with ``h = 1/(n+1)``."""
    h = 1.0 / (n + 1)
    off = np.ones(n - 1)
    return sp.diags([off, -2.0 * np.ones(n), off], [-1, 0, 1], format="csr") / h**2


def laplacian_2d(n: int) -> sp.csr_matrix:
    k = round(n ** 0.5)
    L = laplacian_1d(k)
    eye = sp.identity(k, format="csr")
    return (sp.kron(L, eye) + sp.kron(eye, L)).tocsr()


def _factor(rng, rows: int, rank: int) -> np.ndarray:
    F = rng.standard_normal((rows, rank))
    if rank:
        F /= np.linalg.norm(F, axis=0)
    return F


def generate_problem(spec: ProblemSpec) -> Problem:
    """Deterministic in ``spec.seed``.

    All randomness comes from one generator drawn in a fixed order: diagonal
    entries (A, then B), then C factors, then D factors.
    """
    rng = np.random.default_rng(spec.seed)
    n, m = spec.n, spec.m
    shift = spec.stability_shift

    def build(size):
        if spec.generator == "laplacian_1d":
            return (laplacian_1d(size) + shift * sp.identity(size)).tocsr()
        if spec.generator == "laplacian_2d":
            return (laplacian_2d(size) + shift * sp.identity(size)).tocsr()
        if spec.generator == "diagonal":
            return np.diag(shift - np.abs(rng.standard_normal(size)))
        raise AssertionError(spec.generator)

    if spec.generator == "matrix_market":
        if not spec.matrix_a:
            raise FileNotFoundError("matrix_market generator needs matrix_a")
        for path in (spec.matrix_a, spec.matrix_b):
            if path and not Path(path).exists():
                raise FileNotFoundError(path)
        A = read_matrix_market(spec.matrix_a)
        if spec.lyapunov_mode:
            B = A.conj().T
        elif spec.matrix_b:
            B = read_matrix_market(spec.matrix_b)
        else:
            B = A.T
        n, m = A.shape[0], B.shape[0]
        spec.n, spec.m = n, m
    else:
        A = build(n)
        B = A.conj().T if spec.lyapunov_mode else build(m)

    C1 = _factor(rng, n, spec.rhs_rank)
    C2 = C1 if spec.lyapunov_mode else _factor(rng, m, spec.rhs_rank)
    D1 = _factor(rng, n, spec.init_rank)
    D2 = D1 if spec.lyapunov_mode else _factor(rng, m, spec.init_rank)
    return Problem(spec, A, B, FactoredMatrix(C1, C2), FactoredMatrix(D1, D2))


# ---------------------------------------------------------------- methods

METHODS = ("spectral", "voc_split", "expm_direct", "taylor", "krylov") + tuple(f"bdf{p}" for p in range(1, 7))


@dataclass
class MethodOptions:
    taylor_tol: float = 1e-12
    krylov_tol: float = 1e-10
    krylov_max_order: int = 200
    bdf_steps_per_interval: int = 200
    bdf_startup: str = "ramp"


def run_method(method: str, problem: Problem, opts: MethodOptions | None = None) -> SolveReport:
    opts = opts or MethodOptions()
    if method == "krylov":
        return solve_projected_dse(problem.A, problem.B, problem.C, problem.D, problem.t_grid,
                                   tol=opts.krylov_tol, max_order=opts.krylov_max_order,
                                   lyapunov=problem.lyapunov)
    p = problem.dense()
    if method == "spectral":
        return solve_spectral(p)
    if method == "voc_split":
        return solve_voc_split(p)
    if method == "expm_direct":
        return solve_expm_direct(p)
    if method == "taylor":
        return solve_taylor(p, tol=opts.taylor_tol)
    if method.startswith("bdf") and method[3:].isdigit():
        t = problem.t_grid
        dt = (t[1] - t[0]) if t.size > 1 else problem.spec.t_final
        cfg = BdfConfig(int(method[3:]), dt / opts.bdf_steps_per_interval, opts.bdf_startup)
        return bdf_integrate(p, cfg)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def dim_or_order(report: SolveReport) -> int:
    info = report.info
    if report.method == "krylov":
        return int(info.get("dim_left", 0))
    if report.method == "taylor":
        return int(max((max(o) for o in info.get("orders", [(0, 0)])), default=0))
    if report.method.startswith("bdf"):
        return int(report.method[3:])
    return 0


@dataclass
class BenchmarkRecord:
    method: str
    problem: str
    t: tuple
    errors: tuple
    residuals: tuple
    wall_time: float
    dim_or_order: int
    tolerance: float = float("nan")
    errors_2: tuple = ()  # spectral-norm relative errors; JSON only

    @property
    def final_error(self) -> float:
        return self.errors[-1] if self.errors else float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.final_error <= self.tolerance)


def relative_errors(snaps, ref, ord=None) -> list[float]:
    """Relative errors in the Frobenius norm (``ord=None``) or spectral norm (``ord=2``)."""
    out = []
    for X, R in zip(snaps, ref):
        diff = float(np.linalg.norm(X - R, ord))
        scale = float(np.linalg.norm(R, ord))
        out.append(diff / scale if scale > 0 else diff)
    return out


def run_comparison(spec: ProblemSpec, methods, tolerances: dict | None = None, opts: MethodOptions | None = None,
                   reference=None, dense_cap: int = DENSE_CAP, problem: Problem | None = None) -> list[BenchmarkRecord]:
    """Run each method against a spectral reference.

    Wall time is measured inside the solver (generation and I/O excluded).
    """
    methods = list(methods)
    if not methods:
        return []
    tolerances = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    problem = problem or generate_problem(spec)
    if reference is None:
        if spec.n * spec.m > dense_cap:
            raise ReferenceInfeasible(f"{spec.n}x{spec.m} exceeds dense cap {dense_cap}")
        reference = solve_spectral(problem.dense()).snapshots
    records = []
    for method in methods:
        report = run_method(method, problem, opts)
        dense = report.dense_snapshots()
        errs = relative_errors(dense, reference)
        records.append(BenchmarkRecord(
            method=method, problem=spec.digest(), t=tuple(float(x) for x in report.t_grid),
            errors=tuple(errs), residuals=tuple(float(r) for r in report.residual_norms),
            wall_time=float(report.wall_time), dim_or_order=dim_or_order(report),
            tolerance=float(tolerances.get(method, float("nan"))),
            errors_2=tuple(relative_errors(dense, reference, ord=2))))
    return records


def write_results_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for rec in records:
            for k, (t, e, r) in enumerate(zip(rec.t, rec.errors, rec.residuals)):
                w.writerow([rec.method, k, repr(t), repr(e), repr(r), repr(rec.wall_time), rec.dim_or_order])


def read_results_csv(path, problem: str = "", tolerances: dict | None = None) -> list[BenchmarkRecord]:
    tolerances = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    rows: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for row in reader:
            rows.setdefault(row[0], []).append(row)
    records = []
    for method, rs in rows.items():
        rs.sort(key=lambda r: int(r[1]))
        records.append(BenchmarkRecord(
            method=method, problem=problem,
            t=tuple(float(r[2]) for r in rs), errors=tuple(float(r[3]) for r in rs),
            residuals=tuple(float(r[4]) for r in rs), wall_time=float(rs[0][5]),
            dim_or_order=int(rs[0][6]), tolerance=float(tolerances.get(method, float("nan")))))
    return records


def write_results_json(path, records) -> None:
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in records], fh, indent=2)


def read_results_json(path) -> list[BenchmarkRecord]:
    with open(path) as fh:
        data = json.load(fh)
    return [BenchmarkRecord(**{**d, "t": tuple(d["t"]), "errors": tuple(d["errors"]),
                               "residuals": tuple(d["residuals"]),
                               "errors_2": tuple(d.get("errors_2", ()))}) for d in data]


# ---------------------------------------------------------------- checks

DEFAULT_GATES = {
    "initial_condition": 1e-12,
    "ode_residual": 1e-6,
    "cross_method": 1e-9,
    "lyapunov_hermitian": 1e-11,
    "lyapunov_psd": 1e-10,
    "krylov_error": 1e-8,
}


@dataclass
class GateResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


def central_difference_residual(p: DseProblem, solver, h: float = 1e-5) -> float:
    """Largest relative mismatch between a central difference of the solver's
    output and ``AX + XB + C`` over the interior grid points.
    """
    worst = 0.0
    for t in p.t_grid[1:]:
        grid = np.array([0.0, t - h, t, t + h]) if t - h > 0 else np.array([0.0, t, t + h, t + 2 * h])
        q = DseProblem(p.op, p.C, p.D, grid, p.lyapunov)
        snaps = solver(q).dense_snapshots()
        if grid[1] == t:
            # one-sided second-order difference when t is closer than h to 0
            fd = (-3 * snaps[1] + 4 * snaps[2] - snaps[3]) / (2 * h)
            X = snaps[1]
        else:
            fd = (snaps[3] - snaps[1]) / (2 * h)
            X = snaps[2]
        rhs = p.rhs(X)
        worst = max(worst, float(np.linalg.norm(fd - rhs) / max(np.linalg.norm(rhs), 1e-300)))
    return worst


def run_checks(spec: ProblemSpec, gates: dict | None = None, opts: MethodOptions | None = None) -> list[GateResult]:
    """Invariant gates on one generated problem.

    Dense solvers are cross-checked against each other, the central-difference
    ODE residual and the initial condition are verified, Lyapunov structure is
    checked in Lyapunov mode, and the Krylov solution is compared to the
    spectral reference.
    """
    gates = {**DEFAULT_GATES, **(gates or {})}
    opts = opts or MethodOptions()
    problem = generate_problem(spec)
    p = problem.dense()
    solvers = {"spectral": solve_spectral, "voc_split": solve_voc_split, "expm_direct": solve_expm_direct,
               "taylor": lambda q: solve_taylor(q, tol=opts.taylor_tol)}
    reports = {}
    for name, fn in solvers.items():
        try:
            reports[name] = fn(p)
        except ArithmeticError:
            continue
    ref = reports["spectral"].dense_snapshots()
    out = []
    nD = max(np.linalg.norm(p.D), 1e-300)
    ic = max(float(np.linalg.norm(r.dense(0) - p.D)) / nD if np.any(p.D) else float(np.linalg.norm(r.dense(0)))
             for r in reports.values())
    out.append(GateResult("initial_condition", ic, gates["initial_condition"]))
    ode = max(central_difference_residual(p, solvers[name]) for name in reports if name != "taylor")
    out.append(GateResult("ode_residual", ode, gates["ode_residual"]))
    cross = max(max(relative_errors(r.dense_snapshots()[1:], ref[1:]), default=0.0)
                for name, r in reports.items() if name != "spectral")
    out.append(GateResult("cross_method", cross, gates["cross_method"]))
    if spec.lyapunov_mode:
        herm, psd = 0.0, 0.0
        for r in reports.values():
            for X in r.dense_snapshots():
                nx = np.linalg.norm(X)
                if nx == 0:
                    continue
                herm = max(herm, float(np.linalg.norm(X - X.conj().T) / nx))
                w = np.linalg.eigvalsh(0.5 * (X + X.conj().T))
                psd = max(psd, float(-w.min() / np.abs(w).max()))
        out.append(GateResult("lyapunov_hermitian", herm, gates["lyapunov_hermitian"]))
        out.append(GateResult("lyapunov_psd", psd, gates["lyapunov_psd"]))
    kr = run_method("krylov", problem, opts)
    kerr = max(relative_errors(kr.dense_snapshots()[1:], ref[1:]), default=0.0)
    out.append(GateResult("krylov_error", kerr, gates["krylov_error"]))
    return out

