"""Accuracy, work and wall time of every factorization on seeded random inputs.

    python3 scripts/compare_algorithms.py --sizes 32 64 128 --panel 8
"""

import argparse
import time
from dataclasses import dataclass, field

from ggrqr import algorithms
from ggrqr.counting import OpCounter
from ggrqr.matcore import EPS, metrics, random_matrix


@dataclass
class CompareConfig:
    sizes: list = field(default_factory=lambda: [32, 64, 128])
    panel: int = 8
    seed: int = 42


def run(cfg):
    header = f"{'algorithm':>12} {'n':>5} {'muldiv':>10} {'resid/(n eps)':>14} {'orth/(n eps)':>13} {'ms':>8}"
    print(header)
    for n in cfg.sizes:
        a = random_matrix(n, cfg.seed)
        for name in algorithms.ALGORITHMS:
            c = OpCounter()
            t0 = time.perf_counter()
            res = algorithms.factorize(name, a, counter=c, panel=cfg.panel)
            ms = 1e3 * (time.perf_counter() - t0)
            met = metrics(a, res.q, res.r)
            print(
                f"{name:>12} {n:>5} {c.muldiv:>10} "
                f"{met.reconstruction_residual / (n * EPS):>14.3f} "
                f"{met.orthogonality_defect / (n * EPS):>13.3f} {ms:>8.1f}"
            )


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=CompareConfig().sizes)
    p.add_argument("--panel", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()
    run(CompareConfig(args.sizes, args.panel, args.seed))


if __name__ == "__main__":
    main()
