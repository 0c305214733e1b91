import numpy as np
import pytest
from scipy import stats

from qpmap.generators import IsingSpec, gen_ising_grid, gen_random_mrf


class TestIsingGrid:
    def test_1x2_structure(self):
        m = gen_ising_grid(IsingSpec(1, 2, beta=1.0))
        assert m.num_nodes == 2
        assert m.edges == ((0, 1),)

    def test_3x3_edge_count(self):
        m = gen_ising_grid(IsingSpec(3, 3, beta=1.0))
        assert m.num_nodes == 9
        assert len(m.edges) == 12  # 6 horizontal + 6 vertical

    def test_grid_edges_are_neighbors(self):
        rows, cols = 4, 5
        m = gen_ising_grid(IsingSpec(rows, cols, beta=0.5))
        assert len(m.edges) == rows * (cols - 1) + (rows - 1) * cols
        for i, j in m.edges:
            ri, ci = divmod(i, cols)
            rj, cj = divmod(j, cols)
            assert abs(ri - rj) + abs(ci - cj) == 1

    def test_table_antisymmetry(self):
        m = gen_ising_grid(IsingSpec(3, 3, beta=2.0, seed=5))
        for t in m.tables:
            d = t[0, 0]
            assert np.allclose(t, [[d, -d], [-d, d]])
            assert abs(d) <= 2.0

    def test_unary_bound(self):
        m = gen_ising_grid(IsingSpec(4, 4, beta=1.0, seed=3))
        assert m.has_unaries()
        for u in m.unaries.values():
            assert u[0] == -u[1]
            assert abs(u[0]) <= 0.05

    def test_seed_determinism(self):
        a = gen_ising_grid(IsingSpec(5, 5, beta=1.0, seed=42))
        b = gen_ising_grid(IsingSpec(5, 5, beta=1.0, seed=42))
        c = gen_ising_grid(IsingSpec(5, 5, beta=1.0, seed=43))
        for ta, tb in zip(a.tables, b.tables):
            assert np.array_equal(ta, tb)
        assert any(not np.array_equal(ta, tc) for ta, tc in zip(a.tables, c.tables))

    def test_coupling_uniformity(self):
        beta = 1.5
        samples = []
        for seed in range(500):
            m = gen_ising_grid(IsingSpec(4, 5, beta=beta, seed=seed))
            samples.extend(t[0, 0] for t in m.tables)
        samples = np.array(samples)
        assert len(samples) >= 10_000
        stat, _ = stats.kstest(samples, stats.uniform(loc=-beta, scale=2 * beta).cdf)
        assert stat < 0.05


class TestRandomMrf:
    def test_n2_single_edge(self):
        m = gen_random_mrf(2, 3, seed=0)
        assert m.edges == ((0, 1),)
        assert m.cardinalities == (3, 3)

    def test_density_one_complete(self):
        n = 6
        m = gen_random_mrf(n, 2, density=1.0, seed=1)
        assert len(m.edges) == n * (n - 1) // 2

    def test_connected_at_low_density(self):
        # spanning tree is always present
        m = gen_random_mrf(8, 2, density=1e-9, seed=2)
        assert len(m.edges) >= 7
        parent = list(range(8))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in m.edges:
            parent[find(i)] = find(j)
        assert len({find(v) for v in range(8)}) == 1

    def test_tables_in_range(self):
        m = gen_random_mrf(6, 4, potential_scale=2.5, seed=3)
        for t in m.tables:
            assert t.shape == (4, 4)
            assert t.min() >= 0.0 and t.max() <= 2.5

    def test_seed_determinism(self):
        a = gen_random_mrf(7, 3, seed=9)
        b = gen_random_mrf(7, 3, seed=9)
        assert a.edges == b.edges
        for ta, tb in zip(a.tables, b.tables):
            assert np.array_equal(ta, tb)

    def test_no_unaries(self):
        assert not gen_random_mrf(5, 2, seed=0).has_unaries()
