"""Command line front end.

Four subcommands: `simulate` (machine-count sweeps on synthetic data),
`bench` (per-machine timing), `real` (multi-site CSV protocol with
cross-validated tuning), and `solve` (single-shot solver, JSON output).

Exit codes: 0 success, 1 usage/configuration error, 2 the solver reported
an infeasible problem (or otherwise failed), 3 I/O or data-format error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys

import numpy as np

from .datagen import ExperimentConfig
from .errors import (
    AllMissingColumn,
    DistLdaError,
    InfeasibleProblem,
    ParseError,
    SchemaMismatch,
    SolverError,
)
from .experiments import (
    MODES,
    _out_handle,
    run_bench,
    run_simulation,
    write_bench,
    write_records,
)
from .ingest import C_GRID, T_GRID, load_schema, load_site, run_real
from .solver import DantzigProblem, solve_dantzig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3

# Tuning constants calibrated once on the synthetic benchmark and frozen as
# defaults; see README. Override with --lambda-c / --t-c.
DEFAULT_LAMBDA_C = 1.5
DEFAULT_T_C = 0.5


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this artifact reserves 2 for the
    solver, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_m_list(text: str) -> list:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad machine list {text!r}: {exc}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(
            f"machine counts must be positive integers, got {text!r}")
    return values


def _add_common(p, d_default, n_total_default):
    p.add_argument("--d", type=int, default=d_default, help="dimension")
    p.add_argument("--N", type=int, default=n_total_default,
                   help="total sample size (fixed_N mode and bench)")
    p.add_argument("--rho", type=float, default=0.8,
                   help="AR(1) correlation of the population covariance")
    p.add_argument("--r", type=float, default=0.5,
                   help="class-1 fraction per shard")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--lambda-c", type=float, default=DEFAULT_LAMBDA_C,
                   dest="lambda_c",
                   help="constant C in lambda = C sqrt(log d / n)")
    p.add_argument("--t-c", type=float, default=DEFAULT_T_C, dest="t_c",
                   help="constant for the aggregation threshold")
    p.add_argument("--reps", type=int, default=1,
                   help="independent repetitions per machine count")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="solver threads (results are independent of this)")
    p.add_argument("--out", default="-", help="output CSV path, - for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distlda",
                     description="Distributed sparse LDA experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[], help="machine-count sweep")
    _add_common(p_sim, d_default=100, n_total_default=10000)
    p_sim.add_argument("--m", type=_parse_m_list, default=[1, 4, 10, 25, 50],
                       help="comma-separated machine counts")
    p_sim.add_argument("--n", type=int, default=200,
                       help="per-machine sample size (fixed_n mode)")
    p_sim.add_argument("--mode", choices=MODES, default="fixed_N")

    p_bench = sub.add_parser("bench", help="per-machine timing table")
    _add_common(p_bench, d_default=200, n_total_default=100000)
    p_bench.add_argument("--m", type=_parse_m_list, default=[1, 4, 8],
                         help="comma-separated machine counts")

    p_real = sub.add_parser("real", help="multi-site CSV protocol")
    p_real.add_argument("paths", nargs="+", help="one CSV per site")
    p_real.add_argument("--schema", required=True, help="schema JSON path")
    p_real.add_argument("--reps", type=int, default=10,
                        help="random train/test splits")
    p_real.add_argument("--seed", type=int, default=0)
    p_real.add_argument("--folds", type=int, default=5,
                        help="cross-validation folds for tuning")
    p_real.add_argument("--fraction", type=float, default=0.5,
                        help="training fraction of each site")
    p_real.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_real.add_argument("--out", default="-",
                        help="output CSV path, - for stdout")

    p_solve = sub.add_parser("solve", help="solve one l1-minimization problem")
    p_solve.add_argument("--matrix", required=True,
                         help="text/CSV file with the symmetric matrix")
    p_solve.add_argument("--vector", required=True,
                         help="text/CSV file with the target vector")
    p_solve.add_argument("--lam", type=float, required=True,
                         help="residual bound lambda")
    return parser


def _load_array(path: str, ndim: int) -> np.ndarray:
    with open(path) as fh:
        sample = fh.read(4096)
    delim = "," if "," in sample else None
    arr = np.loadtxt(path, delimiter=delim, ndmin=ndim)
    return np.asarray(arr, dtype=np.float64)


def cmd_simulate(args) -> int:
    n_total = args.N if args.mode == "fixed_N" else args.n
    cfg = ExperimentConfig(
        d=args.d, n_total=n_total, m=1, r=args.r, rho=args.rho,
        seed=args.seed, lambda_c=args.lambda_c, t_c=args.t_c, reps=args.reps)
    records = run_simulation(cfg, args.m, mode=args.mode,
                             threads=args.threads)
    write_records(records, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = ExperimentConfig(
        d=args.d, n_total=args.N, m=1, r=args.r, rho=args.rho,
        seed=args.seed, lambda_c=args.lambda_c, t_c=args.t_c, reps=args.reps)
    rows = run_bench(cfg, args.m, threads=args.threads)
    write_bench(rows, args.out)
    return EXIT_OK


def cmd_real(args) -> int:
    schema = load_schema(args.schema)
    sites = [load_site(path, schema, site_id=i)
             for i, path in enumerate(args.paths)]
    _, rows = run_real(sites, reps=args.reps, seed=args.seed, k=args.folds,
                       fraction=args.fraction, c_grid=C_GRID, t_grid=T_GRID,
                       threads=args.threads)
    with _out_handle(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("method", "mean_misclass", "std_misclass"))
        for method, mean, std in rows:
            w.writerow((method, f"{mean:.6f}", f"{std:.6f}"))
    return EXIT_OK


def cmd_solve(args) -> int:
    a = _load_array(args.matrix, ndim=2)
    b = _load_array(args.vector, ndim=1)
    solution = solve_dantzig(DantzigProblem(a, b, args.lam))
    json.dump(solution.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "simulate": cmd_simulate,
        "bench": cmd_bench,
        "real": cmd_real,
        "solve": cmd_solve,
    }[args.command]
    try:
        return handler(args)
    except InfeasibleProblem as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParseError, SchemaMismatch, AllMissingColumn) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DistLdaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
