"""Compare every method on a generated problem and print the error table."""
import argparse
from dataclasses import dataclass, fields

from dsylv.harness import METHODS, MethodOptions, ProblemSpec, run_comparison


@dataclass
class Config:
    generator: str = "laplacian_1d"
    n: int = 60
    t_final: float = 0.01
    num_snapshots: int = 5
    rhs_rank: int = 1
    init_rank: int = 1
    seed: int = 0
    bdf_steps_per_interval: int = 400


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    for f in fields(Config):
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=type(f.default), default=f.default)
    cfg = Config(**vars(parser.parse_args()))
    spec = ProblemSpec(generator=cfg.generator, n=cfg.n, t_final=cfg.t_final, num_snapshots=cfg.num_snapshots,
                       rhs_rank=cfg.rhs_rank, init_rank=cfg.init_rank, seed=cfg.seed)
    opts = MethodOptions(bdf_steps_per_interval=cfg.bdf_steps_per_interval)
    print(f"{'method':12s} {'final rel err':>14s} {'tolerance':>10s} {'time [s]':>9s} {'dim/order':>9s}")
    for r in run_comparison(spec, METHODS, opts=opts):
        print(f"{r.method:12s} {r.final_error:14.3e} {r.tolerance:10.1e} {r.wall_time:9.3f} {r.dim_or_order:9d}")


if __name__ == "__main__":
    main()
