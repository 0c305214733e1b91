import numpy as np
import pytest

from qpmap import gpem
from qpmap.common import SolverConfig
from qpmap.generators import gen_random_mrf
from qpmap.model import DegenerateNodeError, PairwiseMRF, prepare_model
from qpmap.packed import PackedGraph
from oracles import em_multiplicative_update

TWO_NODE_TABLE = np.array([[2.0, 0.0], [0.0, 1.0]])


def two_node():
    return PairwiseMRF((2, 2), ((0, 1),), (TWO_NODE_TABLE,))


class TestGpUpdate:
    def test_worked_two_node(self):
        # incoming message sum at node 0 under uniform neighbor beliefs
        delta = TWO_NODE_TABLE @ np.array([0.5, 0.5])
        out = gpem.gp_update(np.array([0.5, 0.5]), delta)
        assert np.allclose(out, [2 / 3, 1 / 3])

    def test_constant_tables_identity(self):
        p = np.array([0.3, 0.7])
        out = gpem.gp_update(p, np.array([1.7, 1.7]))
        assert np.allclose(out, p)

    def test_concentration_grows(self):
        p = np.array([0.9, 0.1])
        delta = TWO_NODE_TABLE @ p
        out = gpem.gp_update(p, delta)
        assert out[0] / out[1] > p[0] / p[1]

    def test_zero_weight_errors(self):
        with pytest.raises(DegenerateNodeError):
            gpem.gp_update(np.array([0.5, 0.5]), np.zeros(2))


class TestSolveGp:
    def test_two_node(self):
        rep = gpem.solve_gp(two_node(), SolverConfig(restarts=3, seed=0))
        assert np.array_equal(rep.assignment, [0, 0])
        assert rep.integral_objective == pytest.approx(2.0)

    def test_uniform_init_is_fixed_point_on_symmetric_model(self):
        t = np.array([[1.0, 0.0], [0.0, 1.0]])
        m = PairwiseMRF((2, 2), ((0, 1),), (t,))
        rep_uniform = gpem.solve_gp(
            m, SolverConfig(restarts=1, init="uniform", max_outer_iterations=50)
        )
        assert np.allclose(rep_uniform.beliefs[0], 0.5)
        rep_perturbed = gpem.solve_gp(m, SolverConfig(restarts=1, seed=1))
        assert rep_perturbed.integral_objective == pytest.approx(1.0)
        assert max(rep_perturbed.beliefs[0]) > 0.99

    def test_monotone_on_random_instances(self):
        for seed in range(15):
            m = gen_random_mrf(6, 3, seed=seed)
            rep = gpem.solve_gp(m, SolverConfig(restarts=1, seed=seed, max_outer_iterations=80))
            qp = [t.qp_objective for t in rep.trace]
            assert all(b >= a - 1e-9 for a, b in zip(qp, qp[1:]))

    def test_positivity_preserved(self):
        m = gen_random_mrf(5, 3, seed=2, density=1.0)
        rep = gpem.solve_gp(m, SolverConfig(restarts=1, seed=0, max_outer_iterations=200))
        for p in rep.beliefs:
            assert np.all(p > 1e-300)

    def test_fixed_point_consistency(self):
        m = gen_random_mrf(5, 3, seed=6)
        rep = gpem.solve_gp(
            m, SolverConfig(restarts=1, seed=3, max_outer_iterations=3000,
                            objective_tolerance=1e-13)
        )
        prepared, _ = prepare_model(m)
        g = PackedGraph(prepared)
        P = g.pack_beliefs(rep.beliefs)
        S = g.delta_sums(P)
        for i, p in enumerate(rep.beliefs):
            support = p > 1e-7
            vals = S[i, : len(p)][support]
            assert vals.max() - vals.min() <= 1e-6 * max(1.0, vals.max())


def test_matches_reference_em_update():
    rng = np.random.default_rng(13)
    for seed in range(10):
        m = gen_random_mrf(6, 3, seed=seed)
        prepared, _ = prepare_model(m)
        g = PackedGraph(prepared)
        beliefs = [rng.dirichlet(np.ones(k)) for k in m.cardinalities]
        sweep = gpem._sweep_factory(g)
        P = g.pack_beliefs(beliefs)
        for _ in range(5):
            P = sweep(P, None)
            beliefs = em_multiplicative_update(prepared, beliefs)
            for i, ref in enumerate(beliefs):
                assert np.allclose(P[i, : len(ref)], ref, atol=1e-12)
