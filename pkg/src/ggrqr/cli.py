"""Command-line front end: ``factorize``, ``verify``, ``bench``, ``opcount``.

Exit codes: 0 success, 1 verification failure, 2 parse/usage error,
3 unsupported shape, 4 other runtime failure. Errors print one line to
stderr: ``error: kind=<kind> <details>``.
"""

import argparse
import csv
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import algorithms
from .counting import OpCounter, audit
from .errors import (
    ContractError, GridConfigError, MatrixParseError, UnsupportedShapeError, WorkerError,
)
from .matcore import EPS, metrics, random_matrix
from .matio import guess_format, read_matrix, write_matrix
from .tilepar import cost_model_run, parallel_ggr, partition

# nominal cost of one counted operation under --clock simulated
SIM_OPS_PER_SECOND = 1e9

BENCH_FIELDS = ["algorithm", "n", "panel", "seconds", "muldiv", "residual", "orthogonality"]
PARALLEL_FIELDS = [
    "n", "k", "block", "gamma", "serial_units", "parallel_units", "speedup", "wall_seconds",
]
OPCOUNT_FIELDS = [
    "algorithm", "n", "mul", "add", "div", "sqrt", "muldiv", "formula", "ratio",
    "exact", "within_10pct",
]


class CliError(Exception):
    def __init__(self, code, kind, detail):
        self.code, self.kind, self.detail = code, kind, detail
        super().__init__(detail)


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, bool):
        return str(x).lower()
    return "" if x is None else str(x)


def _write_csv(rows, fields, path):
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(row[f]) for f in fields])
    finally:
        if path:
            out.close()


def gates(m, n, norm_a, met):
    """Pass/fail of each verification gate."""
    size = max(m, n)
    return {
        "residual": met.reconstruction_residual <= 50 * size * EPS,
        "orthogonality": met.orthogonality_defect <= 50 * m * EPS,
        "triangularity": met.max_lower_triangle <= 1e-12 * norm_a,
    }


def _load_input(args):
    if args.input:
        try:
            return read_matrix(args.input, args.format).to_array().copy(order="F")
        except MatrixParseError as exc:
            raise CliError(2, "parse", f"file={args.input} line={exc.line} {exc}") from exc
        except (OSError, ValueError) as exc:
            raise CliError(2, "parse", f"file={args.input} {exc}") from exc
    if args.size is None:
        raise CliError(2, "usage", "give an input file or --size")
    return random_matrix(args.size[0], args.seed)


def _run(name, a, panel, accumulate_q=True, counter=None):
    try:
        return algorithms.factorize(name, a, accumulate_q, counter, panel)
    except UnsupportedShapeError as exc:
        raise CliError(3, "shape", str(exc)) from exc
    except ContractError as exc:
        raise CliError(3, "shape", str(exc)) from exc


def cmd_factorize(args):
    a = _load_input(args)
    res = _run(args.algo, a, args.panel)
    src = Path(args.input) if args.input else Path(f"random{a.shape[0]}")
    fmt = args.format or (guess_format(args.input) if args.input else "csv")
    ext = ".mtx" if fmt == "mm" else ".csv"
    prefix = args.out or str(src.with_suffix(""))
    write_matrix(res.r, prefix + "_R" + ext, fmt)
    if args.q:
        write_matrix(res.q, prefix + "_Q" + ext, fmt)
    print(metrics(a, res.q, res.r).line())
    return 0


def cmd_verify(args):
    a = _load_input(args)
    if args.r:
        if not args.q:
            raise CliError(2, "usage", "--r needs --q")
        try:
            r = read_matrix(args.r).to_array()
            q = read_matrix(args.q).to_array()
        except MatrixParseError as exc:
            raise CliError(2, "parse", f"line={exc.line} {exc}") from exc
        try:
            met = metrics(a, q, r)
        except ContractError as exc:
            raise CliError(3, "shape", str(exc)) from exc
    else:
        res = _run(args.algo, a, args.panel)
        met = metrics(a, res.q, res.r)
    m, n = a.shape
    result = gates(m, n, float(np.linalg.norm(a)), met)
    print(met.line())
    for gate, ok in result.items():
        print(f"{gate}={'pass' if ok else 'fail'}")
    ok = all(result.values())
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _bench_record(name, n, args):
    a = random_matrix(n, args.seed)
    panel = min(args.panel, n) if algorithms.is_blocked(name) else None
    times = []
    for _ in range(args.repeat):
        counter = OpCounter()
        t0 = time.perf_counter()
        res = _run(name, a, args.panel, True, counter)
        wall = time.perf_counter() - t0
        if args.clock == "wall":
            times.append(wall)
        else:
            ops = counter.merge(res.q_counts)
            times.append((ops.muldiv + ops.add + ops.sqrt) / SIM_OPS_PER_SECOND)
    met = metrics(a, res.q, res.r)
    return {
        "algorithm": name,
        "n": n,
        "panel": panel,
        "seconds": float(statistics.median(times)),
        "muldiv": counter.muldiv,
        "residual": met.reconstruction_residual,
        "orthogonality": met.orthogonality_defect,
    }


def _parallel_record(n, args):
    grid = partition(n, args.grid, args.block)
    cost = cost_model_run(n, grid.k, grid.block, args.gamma)
    if args.clock == "wall":
        a = random_matrix(n, args.seed)
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            parallel_ggr(a, grid)
            times.append(time.perf_counter() - t0)
        seconds = float(statistics.median(times))
    else:
        seconds = cost.parallel_units / SIM_OPS_PER_SECOND
    return {
        "n": n, "k": grid.k, "block": grid.block, "gamma": float(args.gamma),
        "serial_units": cost.serial_units, "parallel_units": cost.parallel_units,
        "speedup": cost.speedup, "wall_seconds": seconds,
    }


def cmd_bench(args):
    if args.repeat < 1 or any(n < 1 for n in args.size):
        raise CliError(2, "usage", "--repeat and --size must be positive")
    if args.parallel:
        try:
            rows = [_parallel_record(n, args) for n in args.size]
        except GridConfigError as exc:
            raise CliError(2, "config", str(exc)) from exc
        _write_csv(rows, PARALLEL_FIELDS, args.csv)
        return 0
    rows = [_bench_record(name, n, args) for name in args.algo for n in args.size]
    _write_csv(rows, BENCH_FIELDS, args.csv)
    return 0


def cmd_opcount(args):
    rows = []
    for name in args.algo:
        for n in args.size:
            res = audit(name, n, args.seed)
            c = res.measured
            rows.append({
                "algorithm": name, "n": n, "mul": c.mul, "add": c.add, "div": c.div,
                "sqrt": c.sqrt, "muldiv": c.muldiv, "formula": res.formula,
                "ratio": res.ratio, "exact": res.exact, "within_10pct": res.within(0.10),
            })
    _write_csv(rows, OPCOUNT_FIELDS, args.csv)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ggrqr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, algo_multi=False):
        if algo_multi:
            sp.add_argument("--algo", nargs="+", default=list(algorithms.ALGORITHMS),
                            choices=algorithms.ALGORITHMS)
        else:
            sp.add_argument("--algo", default="ggr", choices=algorithms.ALGORITHMS)
        sp.add_argument("--panel", type=int, default=algorithms.DEFAULT_PANEL)
        sp.add_argument("--seed", type=int, default=42)

    f = sub.add_parser("factorize", help="factor a matrix file, write R (and Q)")
    f.add_argument("input")
    common(f)
    f.add_argument("--format", choices=("mm", "csv"))
    f.add_argument("--q", action="store_true", help="also write Q")
    f.add_argument("--out", help="output prefix (default: input path without suffix)")
    f.set_defaults(func=cmd_factorize, size=None)

    v = sub.add_parser("verify", help="check residual/orthogonality/triangularity gates")
    v.add_argument("input", nargs="?")
    common(v)
    v.add_argument("--format", choices=("mm", "csv"))
    v.add_argument("--size", type=int, nargs=1, help="random seeded input instead of a file")
    v.add_argument("--r", help="verify this R instead of factorizing")
    v.add_argument("--q", help="Q matching --r")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="benchmark sweep, CSV output")
    common(b, algo_multi=True)
    b.add_argument("--size", type=int, nargs="+", default=[16, 32, 64])
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--csv", help="output file (default stdout)")
    b.add_argument("--clock", choices=("simulated", "wall"), default="simulated",
                   help="simulated: counted ops x 1 ns, reproducible; wall: perf_counter")
    b.add_argument("--parallel", action="store_true", help="tile-parallel cost model sweep")
    b.add_argument("--grid", type=int, default=2, help="K for a KxK worker grid")
    b.add_argument("--block", type=int, help="block edge (default n/K)")
    b.add_argument("--gamma", type=float, default=0.1, help="cost per transferred word")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("opcount", help="instrumented multiplication counts vs formulas")
    o.add_argument("--algo", nargs="+", default=["gr", "cgr", "ggr"], choices=("gr", "cgr", "ggr"))
    o.add_argument("--size", type=int, nargs="+", default=[16])
    o.add_argument("--seed", type=int, default=42)
    o.add_argument("--csv", help="output file (default stdout)")
    o.set_defaults(func=cmd_opcount)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: kind={exc.kind} {exc.detail}", file=sys.stderr)
        return exc.code
    except WorkerError as exc:
        print(f"error: kind=worker {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
