import numpy as np
import pytest

from clearnet.graph import (
    Digraph,
    has_stochastic_principal_submatrix,
    is_schur_stable_substochastic,
    reachable_from,
    reachable_to,
    spectral_radius,
    strongly_connected_components,
)
from conftest import make_staged_network, random_substochastic


def ring2():
    return Digraph.from_arcs(2, [(0, 1), (1, 0)])


def chain3():
    return Digraph.from_arcs(3, [(0, 1), (1, 2)])


class TestReachability:
    def test_ring_reaches_everything(self):
        assert reachable_to(ring2(), {0}) == {0, 1}

    def test_chain(self):
        g = chain3()
        assert reachable_to(g, {2}) == {0, 1, 2}
        assert reachable_to(g, {0}) == {0}

    def test_staged_network_first_closure(self):
        net = make_staged_network()
        g = Digraph.from_matrix(net.liabilities)
        assert reachable_to(g, {0, 1, 2, 3}) == frozenset(range(6))

    def test_fixed_point(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(1, 10))
            g = Digraph.from_matrix(rng.random((n, n)) < 0.3)
            targets = set(int(i) for i in rng.choice(n, rng.integers(1, n + 1), replace=False))
            once = reachable_to(g, targets)
            assert reachable_to(g, once) == once

    def test_forward_reachability(self):
        g = chain3()
        assert reachable_from(g, {0}) == {0, 1, 2}
        assert reachable_from(g, {2}) == {2}

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            reachable_to(ring2(), {5})


class TestStronglyConnectedComponents:
    def test_ring_single_sink_component(self):
        report = strongly_connected_components(ring2())
        assert report.components == (frozenset({0, 1}),)
        assert report.is_sink == (True,)
        assert report.is_trivial == (False,)

    def test_chain_three_trivial(self):
        report = strongly_connected_components(chain3())
        assert len(report.components) == 3
        assert all(report.is_trivial)
        sinks = report.sink_components()
        assert sinks == [frozenset({2})]

    def test_staged_network_isolated_sink_cycle(self):
        net = make_staged_network()
        report = strongly_connected_components(Digraph.from_matrix(net.liabilities))
        sinks = {tuple(sorted(c)) for c, s in zip(report.components, report.is_sink) if s}
        assert (13, 14, 15) in sinks
        assert (10, 11, 12) in sinks
        assert (0,) in sinks  # the true sink node, trivial component

    def test_self_arc_component_not_trivial(self):
        g = Digraph.from_arcs(2, [(0, 0), (0, 1)])
        report = strongly_connected_components(g)
        flags = {tuple(c): t for c, t in zip(report.components, report.is_trivial)}
        assert flags[(0,)] is False
        assert flags[(1,)] is True

    def test_partition(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(1, 15))
            g = Digraph.from_matrix(rng.random((n, n)) < 0.25)
            report = strongly_connected_components(g)
            nodes = sorted(i for comp in report.components for i in comp)
            assert nodes == list(range(n))
            for i in range(n):
                assert i in report.component_of(i)

    def test_matches_brute_force_mutual_reachability(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n = int(rng.integers(2, 9))
            g = Digraph.from_matrix(rng.random((n, n)) < 0.3)
            report = strongly_connected_components(g)
            for i in range(n):
                for j in range(n):
                    mutual = j in reachable_from(g, {i}) and i in reachable_from(g, {j})
                    same = report.component_index[i] == report.component_index[j]
                    assert mutual == same


class TestSchurStability:
    def test_stochastic_never_stable(self):
        a = np.array([[0.3, 0.7], [1.0, 0.0]])
        assert not is_schur_stable_substochastic(a)

    def test_deficient_row_reachable(self):
        # deficiency set {0}; node 1 reaches it; rho = (0.5 + sqrt(1.85)) / 2 < 1
        a = np.array([[0.5, 0.4], [1.0, 0.0]])
        assert is_schur_stable_substochastic(a)
        assert spectral_radius(a) == pytest.approx(0.9300734, abs=1e-6)

    def test_block_diagonal_with_stochastic_block(self):
        a = np.array([[0.5, 0.0], [0.0, 1.0]])
        assert not is_schur_stable_substochastic(a)
        assert has_stochastic_principal_submatrix(a)

    def test_rejects_row_sum_above_one(self):
        with pytest.raises(ValueError, match="not substochastic"):
            is_schur_stable_substochastic([[0.9, 0.3], [0.0, 0.5]])

    def test_three_way_equivalence(self):
        # graph criterion == submatrix enumeration == true spectral radius
        for seed in range(300):
            a = random_substochastic(seed)
            rho = float(np.abs(np.linalg.eigvals(a)).max())
            graph = is_schur_stable_substochastic(a)
            enum = not has_stochastic_principal_submatrix(a)
            assert graph == enum
            assert graph == (rho < 1 - 1e-6) or abs(rho - 1) <= 1e-6


class TestSpectralRadius:
    def test_identity(self):
        assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_half(self):
        assert spectral_radius([[0, 0.5], [0.5, 0]]) == pytest.approx(0.5, abs=1e-9)

    def test_cycle_converges_despite_peripheral_spectrum(self):
        a = np.zeros((5, 5))
        for i in range(5):
            a[i, (i + 1) % 5] = 0.9
        assert spectral_radius(a) == pytest.approx(0.9, abs=1e-8)

    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((4, 4))) == 0.0

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_agrees_with_graph_test_on_random(self):
        for seed in range(200):
            a = random_substochastic(seed + 5000)
            rho = float(np.abs(np.linalg.eigvals(a)).max())
            if abs(rho - 1) <= 1e-6:
                continue
            est = spectral_radius(a)
            assert (est < 1 - 1e-6) == is_schur_stable_substochastic(a)

    def test_warns_without_convergence(self):
        a = np.array([[0.0, 1.0], [0.999999, 0.0]])
        with pytest.warns(RuntimeWarning):
            spectral_radius(a, iters=3)
