import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrsync.errors import DomainError, PreconditionError
from lrsync.graphs import (
    Graph,
    anderson_morley_bound,
    gen_complete,
    gen_cycle,
    gen_erdos_renyi,
    gen_path,
    gen_random_regular,
    in_family,
    is_connected_bfs,
    laplacian,
    spectral_summary,
)

from oracles import components


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(PreconditionError):
            Graph.from_edges(3, [(1, 1)])

    def test_rejects_duplicate(self):
        with pytest.raises(PreconditionError):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(PreconditionError):
            Graph.from_edges(3, [(0, 1, 0.0)])

    def test_text_round_trip(self, rng):
        edges = [(i, j, float(rng.uniform(0.1, 3))) for i, j in [(0, 1), (1, 4), (2, 3), (0, 4)]]
        edges.append((2, 4, 0.1 + 0.2))
        g = Graph.from_edges(5, edges)
        text = g.to_text()
        assert text.splitlines()[0] == "n 5"
        g2 = Graph.from_text(text)
        assert g2 == g
        assert g2.to_text() == text

    def test_file_round_trip(self, tmp_path):
        g = gen_random_regular(20, 3, seed=4)
        g.save(tmp_path / "g.txt")
        assert Graph.load(tmp_path / "g.txt") == g

    def test_bad_text(self):
        with pytest.raises(PreconditionError):
            Graph.from_text("0 1 1.0\n")


class TestLaplacian:
    def test_single_edge(self):
        np.testing.assert_array_equal(laplacian(gen_complete(2)), [[1, -1], [-1, 1]])

    def test_path(self):
        np.testing.assert_array_equal(laplacian(gen_path(3)), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    def test_weighted(self):
        L = laplacian(Graph.from_edges(3, [(0, 1, 2.5), (1, 2, 0.5)]))
        np.testing.assert_array_equal(L, [[2.5, -2.5, 0], [-2.5, 3.0, -0.5], [0, -0.5, 0.5]])

    @pytest.mark.parametrize("seed", range(5))
    def test_row_sums(self, seed):
        for g in (gen_random_regular(30, 4, seed), gen_erdos_renyi(25, 0.3, seed)):
            L = laplacian(g)
            assert np.abs(L.sum(axis=1)).max() <= 1e-12
            assert np.array_equal(L, L.T)


class TestSpectrum:
    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_complete(self, n):
        s = spectral_summary(gen_complete(n))
        np.testing.assert_allclose(s.eigenvalues[1:], n, atol=1e-10)
        assert abs(s.eigenvalues[0]) <= 1e-10

    def test_disconnected(self):
        s = spectral_summary(Graph.from_edges(4, [(0, 1), (2, 3)]))
        assert s.lambda2 <= 1e-7
        assert not s.is_connected

    def test_cycle_c4(self):
        # 2 - 2 cos(2 pi k / 4) for k = 0..3
        np.testing.assert_allclose(spectral_summary(gen_cycle(4)).eigenvalues, [0, 2, 2, 4], atol=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_connectivity_matches_union_find(self, seed):
        g = gen_erdos_renyi(12, 0.18, seed)
        s = spectral_summary(g)
        truth = components(g.n, g.edges) == 1
        assert s.is_connected == truth == is_connected_bfs(g)
        assert s.eigenvalues[0] >= -1e-9
        if truth:
            assert s.lambda2 > 0

    def test_zero_eigenvector_is_constant(self):
        s = spectral_summary(gen_random_regular(16, 3, 1))
        v = s.eigenvectors[:, 0]
        np.testing.assert_allclose(np.abs(v), 1 / 4, atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(3, 9), st.data())
    def test_lemma_both_directions(self, n, data):
        pairs = list(itertools.combinations(range(n), 2))
        mask = data.draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
        g = Graph.from_edges(n, [p for p, keep in zip(pairs, mask) if keep])
        s = spectral_summary(g)
        n_zero = int(np.sum(s.eigenvalues <= 1e-7))
        assert n_zero == components(n, g.edges)
        assert s.is_connected == (components(n, g.edges) == 1)


class TestFamily:
    def test_k4(self):
        assert in_family(gen_complete(4), 1, 4)
        assert not in_family(gen_complete(4), 5, 9)

    def test_disconnected_never_member(self):
        assert not in_family(Graph.from_edges(4, [(0, 1), (2, 3)]), 0.0001, 100)

    @pytest.mark.parametrize("seed", range(3))
    def test_example_regular_graphs(self, seed):
        for d in (5, 7):
            assert in_family(gen_random_regular(150, d, seed), 1.0, 13.0)


class TestAndersonMorley:
    def test_single_edge_tight(self):
        g = gen_complete(2)
        assert anderson_morley_bound(g) == 2.0
        assert spectral_summary(g).lambdaN == pytest.approx(2.0, abs=1e-12)

    def test_regular(self):
        assert anderson_morley_bound(gen_random_regular(40, 6, 2)) == 12.0

    def test_edgeless(self):
        with pytest.raises(DomainError):
            anderson_morley_bound(Graph(3, ()))

    def test_random_graphs(self):
        for seed in range(50):
            g = gen_erdos_renyi(20, 0.25, seed)
            if g.edges:
                assert anderson_morley_bound(g) >= spectral_summary(g).lambdaN - 1e-9


class TestGenerators:
    def test_fixed_topologies(self):
        assert gen_complete(4).n_edges == 6
        assert gen_path(3).n_edges == 2
        assert gen_cycle(4).n_edges == 4

    def test_small_n_rejected(self):
        for gen in (gen_complete, gen_path, gen_cycle):
            with pytest.raises(DomainError):
                gen(1)

    @pytest.mark.parametrize("d", [5, 7])
    def test_regular_example_size(self, d):
        g = gen_random_regular(150, d, seed=d)
        np.testing.assert_array_equal(g.degrees(), d)
        assert is_connected_bfs(g)

    def test_regular_forced_k4(self):
        assert gen_random_regular(4, 3, seed=0) == gen_complete(4)

    def test_two_regular_six_nodes_is_hamiltonian_cycle(self):
        for seed in range(20):
            g = gen_random_regular(6, 2, seed)
            assert g.n_edges == 6 and is_connected_bfs(g)
            np.testing.assert_allclose(spectral_summary(g).eigenvalues, spectral_summary(gen_cycle(6)).eigenvalues, atol=1e-10)

    def test_regular_deterministic(self):
        assert gen_random_regular(150, 5, 42).edges == gen_random_regular(150, 5, 42).edges
        assert gen_random_regular(150, 5, 42).edges != gen_random_regular(150, 5, 43).edges

    def test_regular_parity(self):
        with pytest.raises(DomainError):
            gen_random_regular(5, 3, 0)
        with pytest.raises(DomainError):
            gen_random_regular(4, 4, 0)

    def test_erdos_renyi_extremes(self):
        assert gen_erdos_renyi(7, 1.0, 0) == gen_complete(7)
        assert gen_erdos_renyi(5, 1e-12, 0).n_edges == 0
        with pytest.raises(DomainError):
            gen_erdos_renyi(5, 0.0, 0)

    def test_erdos_renyi_edge_count(self):
        n, p = 30, 0.3
        pairs = n * (n - 1) / 2
        counts = np.array([gen_erdos_renyi(n, p, s).n_edges for s in range(100)])
        sd = np.sqrt(pairs * p * (1 - p) / len(counts))
        assert abs(counts.mean() - p * pairs) <= 3 * sd

    def test_two_d_bound_on_regular(self):
        for d in (3, 5, 7):
            for seed in range(3):
                g = gen_random_regular(60, d, seed)
                assert spectral_summary(g).lambdaN <= 2 * d + 1e-9
