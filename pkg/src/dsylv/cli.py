"""Command line entry point: ``dsylv solve | bench | check``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

import scipy.sparse as sp

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ReferenceInfeasible
from .harness import (
    DEFAULT_GATES,
    DEFAULT_TOLERANCES,
    DENSE_CAP,
    METHODS,
    BenchmarkRecord,
    MethodOptions,
    ProblemSpec,
    dim_or_order,
    generate_problem,
    relative_errors,
    run_checks,
    run_comparison,
    run_method,
    write_results_csv,
    write_results_json,
)
from .dense_solvers import solve_spectral
from .io import write_binary, write_factored, write_matrix_market
from .linalg_core import FactoredMatrix

EXIT_OK = 0
EXIT_GATE = 2


def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def build_spec(cfg: dict, args) -> ProblemSpec:
    problem_fields = {f.name for f in fields(ProblemSpec)}
    data = {k: v for k, v in cfg.items() if k in problem_fields}
    data.update(cfg.get("problem", {}))
    if args.seed is not None:
        data["seed"] = args.seed
    for name in ("generator", "n", "m", "t_final", "num_snapshots", "rhs_rank", "init_rank"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return ProblemSpec.from_dict(data)


def build_options(cfg: dict, args) -> MethodOptions:
    opts = MethodOptions(**cfg.get("options", {}))
    if getattr(args, "tol", None) is not None and args.command != "check":
        opts.taylor_tol = args.tol
        opts.krylov_tol = args.tol
    return opts


def _methods(cfg: dict, args) -> list[str]:
    if args.method:
        out = []
        for item in args.method:
            out.extend(x for x in item.split(",") if x)
    else:
        out = list(cfg.get("methods", []))
    bad = [m for m in out if m not in METHODS]
    if bad:
        raise SystemExit(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
    return out


def _write_records(out: Path, records, fmt: str) -> Path:
    if fmt == "json":
        path = out / "results.json"
        write_results_json(path, records)
    else:
        path = out / "results.csv"
        write_results_csv(path, records)
    return path


def write_problem(out: Path, problem) -> None:
    """Save the generated matrices so runs can be compared byte for byte."""
    for name, M in (("A", problem.A), ("B", problem.B)):
        if sp.issparse(M):
            write_matrix_market(out / f"problem_{name}.mtx", M)
        else:
            write_binary(out / f"problem_{name}.bin", M)
    write_factored(out / "problem_C", problem.C)
    write_factored(out / "problem_D", problem.D)


def cmd_solve(args, cfg) -> int:
    spec = build_spec(cfg, args)
    methods = _methods(cfg, args) or ["spectral"]
    if len(methods) != 1:
        raise SystemExit("solve takes exactly one --method")
    method = methods[0]
    opts = build_options(cfg, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = generate_problem(spec)
    report = run_method(method, problem, opts)
    snaps = report.snapshots
    for k, X in enumerate(snaps):
        stem = out / f"snapshot_{k:03d}"
        if isinstance(X, FactoredMatrix):
            write_factored(stem, X)
        else:
            write_binary(stem.with_suffix(".bin"), X)
    if spec.n * spec.m <= DENSE_CAP:
        ref = solve_spectral(problem.dense()).snapshots
        errs = relative_errors(report.dense_snapshots(), ref)
    else:
        errs = [float("nan")] * len(snaps)
    rec = BenchmarkRecord(method, spec.digest(), tuple(float(t) for t in report.t_grid), tuple(errs),
                          tuple(float(r) for r in report.residual_norms), float(report.wall_time),
                          dim_or_order(report), DEFAULT_TOLERANCES.get(method, float("nan")))
    path = _write_records(out, [rec], args.format)
    print(f"{method}: {len(snaps)} snapshots in {report.wall_time:.3f}s -> {path}")
    return EXIT_OK


def cmd_bench(args, cfg) -> int:
    spec = build_spec(cfg, args)
    methods = _methods(cfg, args) or ["spectral", "voc_split", "expm_direct", "krylov", "bdf2"]
    opts = build_options(cfg, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = generate_problem(spec)
    write_problem(out, problem)
    with open(out / "problem.json", "w") as fh:
        json.dump({"spec": asdict(spec), "digest": spec.digest()}, fh, indent=2)
    try:
        records = run_comparison(spec, methods, cfg.get("tolerances"), opts, problem=problem)
    except ReferenceInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    path = _write_records(out, records, args.format)
    for r in records:
        flag = "ok" if r.passed else "above tolerance"
        print(f"{r.method:12s} final rel err {r.final_error:.3e}  time {r.wall_time:.3f}s  "
              f"dim/order {r.dim_or_order}  {flag}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_check(args, cfg) -> int:
    spec = build_spec(cfg, args)
    gates = dict(DEFAULT_GATES)
    gates.update(cfg.get("gates", {}))
    if args.tol is not None:
        gates = {k: args.tol for k in gates}
    opts = build_options(cfg, args)
    results = run_checks(spec, gates, opts)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "check.json", "w") as fh:
            json.dump([{"name": r.name, "value": r.value, "tolerance": r.tolerance, "passed": r.passed}
                       for r in results], fh, indent=2)
    return EXIT_GATE if failed else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsylv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("solve", "solve one problem with one method and write snapshots"),
                           ("bench", "compare methods against the spectral reference"),
                           ("check", "run the invariant gates on a problem")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="TOML file with ProblemSpec fields")
        p.add_argument("--method", action="append", help="method name(s), comma separated or repeated")
        p.add_argument("--tol", type=float, help="solver tolerance (check: replaces every gate tolerance)")
        p.add_argument("--out", default=None if name == "check" else "out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int)
        p.add_argument("--generator")
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--t-final", dest="t_final", type=float)
        p.add_argument("--num-snapshots", dest="num_snapshots", type=int)
        p.add_argument("--rhs-rank", dest="rhs_rank", type=int)
        p.add_argument("--init-rank", dest="init_rank", type=int)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    cfg = load_config(args.config)
    handler = {"solve": cmd_solve, "bench": cmd_bench, "check": cmd_check}[args.command]
    return handler(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
