"""Damped synchronous max-product belief propagation baseline.

Messages live in the log domain, one vector per directed edge, and are
max-normalized to zero after every update.  Zero potentials map to a large
negative log value.  The decoded quality reported is the best integral
objective seen over all iterations, since loopy max-product need not
converge.  With damping 0 the fixed point on trees is the exact
max-marginal of the table-product objective.
"""

from __future__ import annotations

import time
from typing import List, Optional

import numpy as np

from . import model
from .common import SolverConfig, SolveReport, TraceRecord, restart_rng
from .model import PairwiseMRF
from .packed import PackedGraph

LOG_ZERO = -1e9
DEFAULT_LOOPY_DAMPING = 0.5


def _is_forest(mrf: PairwiseMRF) -> bool:
    parent = list(range(mrf.num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in mrf.edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


class _MpGraph:
    """Directed-edge stacking of a packed graph for max-product sweeps."""

    def __init__(self, graph: PackedGraph):
        self.graph = graph
        m = len(graph.src)
        with np.errstate(divide="ignore"):
            L = np.where(graph.tables > 0.0, np.log(np.maximum(graph.tables, 1e-320)), LOG_ZERO)
        self.logt = L
        # directed edge 2e is src->tgt, 2e+1 is tgt->src
        self.dir_src = np.empty(2 * m, dtype=int)
        self.dir_tgt = np.empty(2 * m, dtype=int)
        self.dir_src[0::2], self.dir_tgt[0::2] = graph.src, graph.tgt
        self.dir_src[1::2], self.dir_tgt[1::2] = graph.tgt, graph.src
        self.rev = np.arange(2 * m) ^ 1
        self.tgt_valid = graph.valid[self.dir_tgt]

    def incoming(self, M: np.ndarray) -> np.ndarray:
        B = np.zeros((self.graph.n, self.graph.kmax))
        np.add.at(B, self.dir_tgt, M)
        return B

    def iterate(self, M: np.ndarray, damping: float) -> np.ndarray:
        excl = self.incoming(M)[self.dir_src] - M[self.rev]
        fwd = (self.logt + excl[0::2][:, :, None]).max(axis=1)
        bwd = (self.logt + excl[1::2][:, None, :]).max(axis=2)
        new = np.empty_like(M)
        new[0::2], new[1::2] = fwd, bwd
        new = damping * M + (1.0 - damping) * new
        new -= np.where(self.tgt_valid, new, -np.inf).max(axis=1, keepdims=True)
        return new


def mp_iteration(mrf: PairwiseMRF, messages: np.ndarray, damping: float = 0.0) -> np.ndarray:
    """One synchronous damped sweep over a (2|E|, kmax) message matrix."""
    return _MpGraph(PackedGraph(mrf)).iterate(messages, damping)


def solve_mp(
    mrf: PairwiseMRF,
    config: Optional[SolverConfig] = None,
    damping: Optional[float] = None,
    restart_noise: float = 0.01,
) -> SolveReport:
    """Run max-product with restarts (noisy message initializations).

    `config.objective_tolerance` doubles as the max-message-change
    convergence threshold.  Damping defaults to 0 on forests and 0.5 on
    loopy graphs.
    """
    config = config or SolverConfig(max_outer_iterations=1000)
    prepared, offset = model.prepare_model(mrf)
    graph = PackedGraph(prepared)
    mp = _MpGraph(graph)
    if damping is None:
        damping = 0.0 if _is_forest(mrf) else DEFAULT_LOOPY_DAMPING

    best: Optional[SolveReport] = None
    restarts_converged: List[bool] = []
    t0 = time.perf_counter()
    for r in range(config.restarts):
        M = np.zeros((2 * len(graph.src), graph.kmax))
        if r > 0:
            M += restart_noise * restart_rng(config, r).random(M.shape)
        trace: List[TraceRecord] = []
        converged = False
        iterations = 0
        best_val = -np.inf
        best_a = graph.decode(mp.incoming(M))
        for it in range(1, config.max_outer_iterations + 1):
            new = mp.iterate(M, damping)
            change = float(np.abs((new - M)[mp.tgt_valid]).max(initial=0.0))
            M = new
            iterations = it
            B = mp.incoming(M)
            a = graph.decode(B)
            integral = graph.assignment_value(a) - offset.shift_total
            trace.append(TraceRecord(it, integral, integral))
            if integral > best_val:
                best_val, best_a = integral, a
            if change < config.objective_tolerance:
                converged = True
                break
        restarts_converged.append(converged)
        integral = model.evaluate_assignment(mrf, best_a)
        if best is None or integral > best.integral_objective:
            B = mp.incoming(M)
            logb = np.where(graph.valid, B, -np.inf)
            b = np.exp(logb - logb.max(axis=1, keepdims=True))
            b /= b.sum(axis=1, keepdims=True)
            best = SolveReport(
                assignment=best_a,
                integral_objective=integral,
                trace=trace,
                beliefs=graph.unpack_beliefs(np.where(graph.valid, b, 0.0)),
                iterations=iterations,
                converged=converged,
                restart_index=r,
                restarts_converged=[],
            )
    assert best is not None
    best.restarts_converged = restarts_converged
    best.wall_time_s = time.perf_counter() - t0
    return best
