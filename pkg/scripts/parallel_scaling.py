"""Cost-model speedup of tile-parallel GGR as n grows, for a few tilings.

    python3 scripts/parallel_scaling.py --grid 2 --sizes 64 128 256 512
    python3 scripts/parallel_scaling.py --grid 2 --wall   # also time the thread pool
"""

import argparse
import time
from dataclasses import dataclass, field

from ggrqr.ggr import ggr_factorize
from ggrqr.matcore import random_matrix
from ggrqr.tilepar import cost_model_run, parallel_ggr, partition


@dataclass
class ScalingConfig:
    grid: int = 2
    sizes: list = field(default_factory=lambda: [64, 128, 256, 512])
    gamma: float = 0.1
    wall: bool = False


def tilings(n, k):
    # edge-k tiles, and the coarse n/k tiles
    out = [k]
    if n % k == 0 and n // k != k:
        out.append(n // k)
    return out


def run(cfg):
    k = cfg.grid
    print(f"grid {k}x{k}, gamma={cfg.gamma}, ideal speedup {k * k}")
    print(f"{'n':>5} {'block':>6} {'speedup':>8} {'comm':>10}" + ("  wall_par/seq" if cfg.wall else ""))
    for n in cfg.sizes:
        for block in tilings(n, k):
            rep = cost_model_run(n, k, block, cfg.gamma)
            line = f"{n:>5} {block:>6} {rep.speedup:>8.3f} {rep.comm_units:>10}"
            if cfg.wall and n <= 256:
                a = random_matrix(n)
                t0 = time.perf_counter()
                ggr_factorize(a, accumulate_q=False)
                t1 = time.perf_counter()
                parallel_ggr(a, partition(n, k, block))
                t2 = time.perf_counter()
                line += f"  {(t2 - t1) / (t1 - t0):.2f}"
            print(line)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--grid", type=int, default=2)
    p.add_argument("--sizes", type=int, nargs="+", default=ScalingConfig().sizes)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--wall", action="store_true")
    args = p.parse_args()
    run(ScalingConfig(args.grid, args.sizes, args.gamma, args.wall))


if __name__ == "__main__":
    main()
