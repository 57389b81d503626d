"""Observed BDF convergence orders under repeated step halving."""
import argparse
from dataclasses import dataclass, fields

import numpy as np

from dsylv.bdf import BdfConfig, bdf_integrate
from dsylv.dense_solvers import DseProblem, solve_spectral


@dataclass
class Config:
    size: int = 6
    seed: int = 7
    t_final: float = 1.0
    halvings: int = 4
    startup: str = "exact"


BASE_STEP = {1: 0.02, 2: 0.02, 3: 0.02, 4: 0.02, 5: 0.05, 6: 0.1}


def make_problem(cfg: Config) -> DseProblem:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.size

    def stable(shift):
        P = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
        return P @ np.diag(shift - rng.random(n)) @ np.linalg.inv(P)

    A, B = stable(-1.0), stable(-0.5)
    C = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    D = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return DseProblem.from_matrices(A, B, C, D, [0.0, cfg.t_final])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    for f in fields(Config):
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=type(f.default), default=f.default)
    cfg = Config(**vars(parser.parse_args()))
    p = make_problem(cfg)
    ref = solve_spectral(p).snapshots[-1]
    print("order  errors (h0, h0/2, ...)                       observed")
    for order, h0 in BASE_STEP.items():
        errs = [np.linalg.norm(bdf_integrate(p, BdfConfig(order, h0 / 2 ** k, cfg.startup)).snapshots[-1] - ref)
                for k in range(cfg.halvings + 1)]
        slopes = -np.diff(np.log2(errs))
        print(f"BDF{order}   " + " ".join(f"{e:.2e}" for e in errs) + f"   {slopes.mean():.3f}")


if __name__ == "__main__":
    main()
