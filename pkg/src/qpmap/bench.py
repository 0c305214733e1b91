"""Benchmark harness: mixed Ising grids, matched seeds, CSV summaries.

Every quantity produced is a pure function of the plan.  All solvers in a
cell see identical instances and identical restart seeds; wall time covers
solving only, not generation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import cccp, convex, gpem, maxproduct
from .common import SolverConfig, SolveReport
from .generators import IsingSpec, gen_ising_grid
from .model import PairwiseMRF

SOLVER_NAMES = ("cccp", "convex", "gpem", "maxprod")


def run_solver(name: str, mrf: PairwiseMRF, config: SolverConfig) -> SolveReport:
    if name == "cccp":
        return cccp.solve(mrf, config)
    if name == "convex":
        return convex.solve_convex(mrf, config)
    if name == "gpem":
        return gpem.solve_gp(mrf, config)
    if name == "maxprod":
        return maxproduct.solve_mp(mrf, config)
    raise ValueError(f"unknown solver {name!r}")


def default_max_iterations(name: str) -> int:
    return 1000 if name == "maxprod" else 500


@dataclass(frozen=True)
class BenchPlan:
    sizes: Tuple[Tuple[int, int], ...] = ((10, 10), (20, 20))
    betas: Tuple[float, ...] = (0.5, 1.0, 2.0)
    instances: int = 10
    restarts: int = 10
    solvers: Tuple[str, ...] = ("cccp", "maxprod")
    seed: int = 0

    def __post_init__(self):
        if self.instances < 1 or self.restarts < 1 or not self.sizes or not self.betas:
            raise ValueError("all plan counts must be >= 1")
        for s in self.solvers:
            if s not in SOLVER_NAMES:
                raise ValueError(f"unknown solver {s!r}")


@dataclass
class Cell:
    """Per (solver, size, beta) raw results across instances."""

    solver: str
    size: str
    beta: float
    qualities: List[float] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    converged_runs: List[bool] = field(default_factory=list)

    @property
    def mean_quality(self) -> float:
        return float(np.mean(self.qualities))

    @property
    def mean_time_s(self) -> float:
        return float(np.mean(self.times))

    @property
    def converged_frac(self) -> float:
        return float(np.mean(self.converged_runs))


@dataclass
class BenchResult:
    plan: BenchPlan
    cells: Dict[Tuple[str, str, float], Cell]

    def gains(self) -> List[Tuple[str, str, str, float, float]]:
        """Per-instance-matched relative gains (Q_a - Q_b)/Q_b for every
        ordered solver pair, averaged within each (size, beta) cell."""
        out = []
        solvers = self.plan.solvers
        for a in solvers:
            for b in solvers:
                if a == b:
                    continue
                for (r, c) in self.plan.sizes:
                    size = f"{r}x{c}"
                    for beta in self.plan.betas:
                        qa = np.asarray(self.cells[(a, size, beta)].qualities)
                        qb = np.asarray(self.cells[(b, size, beta)].qualities)
                        out.append((a, b, size, beta, float(np.mean((qa - qb) / qb))))
        return out

    def mean_gain(self, a: str, b: str, size: str) -> float:
        """Gain of `a` over `b` at one grid size, averaged over betas."""
        vals = [g for sa, sb, sz, _, g in self.gains() if (sa, sb, sz) == (a, b, size)]
        return float(np.mean(vals))


def instance_seed(plan: BenchPlan, size_idx: int, beta_idx: int, instance: int) -> int:
    return int(np.random.SeedSequence([plan.seed, size_idx, beta_idx, instance]).generate_state(1)[0])


def run_benchmark(plan: BenchPlan) -> BenchResult:
    cells: Dict[Tuple[str, str, float], Cell] = {}
    for si, (rows, cols) in enumerate(plan.sizes):
        size = f"{rows}x{cols}"
        for bi, beta in enumerate(plan.betas):
            for s in plan.solvers:
                cells[(s, size, beta)] = Cell(s, size, beta)
            for t in range(plan.instances):
                seed = instance_seed(plan, si, bi, t)
                mrf = gen_ising_grid(IsingSpec(rows, cols, beta, seed=seed))
                for s in plan.solvers:
                    config = SolverConfig(
                        max_outer_iterations=default_max_iterations(s),
                        restarts=plan.restarts,
                        seed=seed,
                    )
                    t0 = time.perf_counter()
                    report = run_solver(s, mrf, config)
                    elapsed = time.perf_counter() - t0
                    cell = cells[(s, size, beta)]
                    cell.qualities.append(report.integral_objective)
                    cell.times.append(elapsed)
                    cell.converged_runs.extend(report.restarts_converged)
    return BenchResult(plan, cells)


def summary_csv(result: BenchResult) -> str:
    lines = ["solver,size,beta,mean_quality,mean_time_s,converged_frac"]
    for s in result.plan.solvers:
        for (r, c) in result.plan.sizes:
            size = f"{r}x{c}"
            for beta in result.plan.betas:
                cell = result.cells[(s, size, beta)]
                lines.append(
                    f"{s},{size},{beta:.10g},{cell.mean_quality:.10g},"
                    f"{cell.mean_time_s:.6g},{cell.converged_frac:.6g}"
                )
    return "\n".join(lines) + "\n"


def gains_csv(result: BenchResult) -> str:
    lines = ["solver_a,solver_b,size,beta,mean_gain"]
    for a, b, size, beta, gain in result.gains():
        lines.append(f"{a},{b},{size},{beta:.10g},{gain:.10g}")
    return "\n".join(lines) + "\n"
