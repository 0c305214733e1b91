"""Command-line interface: solve UAI files, generate instances, run benchmarks.

Exit codes: 0 success, 2 input/parse problem, 3 degenerate or unsupported
model (message names the offending node).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import bench, uai
from .bench import BenchPlan, default_max_iterations, run_solver
from .common import SolverConfig, SolveReport
from .generators import IsingSpec, gen_ising_grid, gen_random_mrf
from .model import DegenerateNodeError, ModelError, PairwiseMRF
from .uai import UaiParseError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3


def _log_transform(mrf: PairwiseMRF) -> PairwiseMRF:
    """Entrywise log of all tables, for files using the probability convention."""

    def check(a, what):
        if np.any(np.asarray(a) <= 0.0):
            raise UaiParseError(0, f"--log-transform requires strictly positive {what}")
        return np.log(a)

    tables = tuple(check(t, "table entries") for t in mrf.tables)
    unaries = None
    if mrf.unaries:
        unaries = {i: check(u, "unary entries") for i, u in mrf.unaries.items()}
    return PairwiseMRF(mrf.cardinalities, mrf.edges, tables, unaries)


def _write_trace(path: str, report: SolveReport) -> None:
    has_convex = any(t.convex_objective is not None for t in report.trace)
    header = "iter,qp_objective,integral_objective"
    if has_convex:
        header += ",convex_objective"
    lines = [header]
    for t in report.trace:
        row = f"{t.iteration},{t.qp_objective:.17g},{t.integral_objective:.17g}"
        if has_convex:
            row += f",{t.convex_objective:.17g}"
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        mrf = uai.parse_uai(Path(args.input).read_text())
        if args.log_transform:
            mrf = _log_transform(mrf)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UaiParseError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARSE

    config = SolverConfig(
        max_outer_iterations=args.max_iters or default_max_iterations(args.solver),
        objective_tolerance=args.tol,
        restarts=args.restarts,
        seed=args.seed,
    )
    try:
        t0 = time.perf_counter()
        report = run_solver(args.solver, mrf, config)
        elapsed = time.perf_counter() - t0
    except (DegenerateNodeError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    print("assignment:", " ".join(str(x) for x in report.assignment))
    print(f"objective: {report.integral_objective:.10g}")
    print(f"iterations: {report.iterations}")
    print(f"converged: {report.converged}")
    print(f"wall_time_s: {elapsed:.4f}")
    if args.trace:
        _write_trace(args.trace, report)
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    if args.kind == "ising":
        mrf = gen_ising_grid(IsingSpec(args.rows, args.cols, args.beta, seed=args.seed))
    else:
        mrf = gen_random_mrf(args.nodes, args.labels, args.density, args.scale, args.seed)
    Path(args.output).write_text(uai.write_uai(mrf))
    print(f"wrote {args.output}: {mrf.num_nodes} variables, {len(mrf.edges)} edges")
    return EXIT_OK


def _parse_sizes(text: str) -> tuple:
    sizes = []
    for part in text.split(","):
        r, _, c = part.partition("x")
        sizes.append((int(r), int(c)))
    return tuple(sizes)


def cmd_bench(args: argparse.Namespace) -> int:
    plan = BenchPlan(
        sizes=_parse_sizes(args.sizes),
        betas=tuple(float(b) for b in args.betas.split(",")),
        instances=args.instances,
        restarts=args.restarts,
        solvers=tuple(args.solvers.split(",")),
        seed=args.seed,
    )
    result = bench.run_benchmark(plan)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "summary.csv").write_text(bench.summary_csv(result))
    (outdir / "gains.csv").write_text(bench.gains_csv(result))
    print(bench.summary_csv(result), end="")
    print(f"wrote {outdir}/summary.csv and {outdir}/gains.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpmap", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a UAI MARKOV instance")
    sp.add_argument("--input", required=True)
    sp.add_argument("--solver", choices=bench.SOLVER_NAMES, default="cccp")
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--max-iters", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace", default=None, help="write per-iteration trace CSV here")
    sp.add_argument("--log-transform", action="store_true",
                    help="take entrywise log of tables on ingest")
    sp.set_defaults(func=cmd_solve)

    gp = sub.add_parser("generate", help="generate an instance as a UAI file")
    gsub = gp.add_subparsers(dest="kind", required=True)
    gi = gsub.add_parser("ising", help="mixed Ising grid")
    gi.add_argument("--rows", type=int, required=True)
    gi.add_argument("--cols", type=int, required=True)
    gi.add_argument("--beta", type=float, required=True)
    gi.add_argument("--seed", type=int, default=0)
    gi.add_argument("--output", required=True)
    gi.set_defaults(func=cmd_generate)
    gr = gsub.add_parser("random", help="connected random model")
    gr.add_argument("--nodes", type=int, required=True)
    gr.add_argument("--labels", type=int, required=True)
    gr.add_argument("--density", type=float, default=0.5)
    gr.add_argument("--scale", type=float, default=1.0)
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--output", required=True)
    gr.set_defaults(func=cmd_generate)

    bp = sub.add_parser("bench", help="run the Ising comparison benchmark")
    bp.add_argument("--sizes", default="10x10,20x20")
    bp.add_argument("--betas", default="0.5,1.0,2.0")
    bp.add_argument("--instances", type=int, default=10)
    bp.add_argument("--restarts", type=int, default=10)
    bp.add_argument("--solvers", default="cccp,maxprod")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--output-dir", default="bench_out")
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
