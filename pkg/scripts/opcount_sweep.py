"""Measured multiply+divide counts of GR / CGR / GGR against the closed forms.

    python3 scripts/opcount_sweep.py --sizes 4 8 16 32 64 128
"""

import argparse
from dataclasses import dataclass, field

from ggrqr.counting import alpha_ratio, audit


@dataclass
class SweepConfig:
    sizes: list = field(default_factory=lambda: [4, 8, 16, 32, 64])
    seed: int = 42


def run(cfg):
    print(f"{'n':>5} {'gr':>10} {'cgr':>10} {'ggr':>10} {'cgr/gr':>8} {'alpha':>8}")
    for n in cfg.sizes:
        res = {name: audit(name, n, cfg.seed) for name in ("gr", "cgr", "ggr")}
        gr, cgr, ggr = (res[k].measured.muldiv for k in ("gr", "cgr", "ggr"))
        alpha = alpha_ratio(n) if n >= 2 else float("nan")
        print(f"{n:>5} {gr:>10} {cgr:>10} {ggr:>10} {cgr / max(gr, 1):>8.4f} {alpha:>8.4f}")
        for name, r in res.items():
            if not r.exact:
                print(f"      {name}: measured {r.measured.muldiv} vs formula {r.formula}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=SweepConfig().sizes)
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()
    run(SweepConfig(args.sizes, args.seed))


if __name__ == "__main__":
    main()
