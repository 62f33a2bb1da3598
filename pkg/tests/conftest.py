"""Shared fixtures: hand-built networks and seeded random generators."""

import numpy as np
import pytest

from clearnet.model import FinancialNetwork
from clearnet.simgen import GeneratorConfig, ShockConfig, apply_shock, derive_seed, generate


@pytest.fixture
def two_node():
    """Node 0 owes 10 to node 1, node 1 owes 5 back; assets (3, 0).

    Fixed-point oracle by hand: p0 = min(10, 3 + p1), p1 = min(5, p0);
    from (10, 5): (8, 5) -> (8, 5). Dominant vector (8, 5).
    """
    return FinancialNetwork([[0, 10], [5, 0]], [3, 0])


@pytest.fixture
def ring():
    """Two-node unit ring with no assets: clearing vectors are {(t, t)}."""
    return FinancialNetwork([[0, 1], [1, 0]], [0, 0], [0, 0])


def make_two_sink_creditors(c3=5.0, owed1=6.0, owed2=4.0):
    """Nodes 0, 1 are unfunded sinks; node 2 owes them and holds c3.

    Closed form: node 2 pays theta = min(owed1 + owed2, c3) in total.
    """
    return FinancialNetwork(
        [[0, 0, 0], [0, 0, 0], [owed1, owed2, 0]], [0, 0, c3]
    )


@pytest.fixture
def two_sink_creditors():
    return make_two_sink_creditors()


def make_staged_network():
    """Sixteen nodes exercising every stage of the uniqueness reduction.

    Node 0 is the only sink; 1, 2, 3 hold assets. Nodes 4, 5 owe into
    {0, 2} (claimed at stage 0), feed 6, 7, 8 (stage 1, joined by 9 which
    owes 8), which feed the closed cycle {10, 11, 12} (stage 2). The cycle
    {13, 14, 15} is isolated: free block, so the clearing vector is not
    unique, yet payments of nodes 0..12 are pinned. Node 9 receives
    nothing and pays nothing in every clearing vector.
    """
    n = 16
    w = np.zeros((n, n))
    arcs = [
        (1, 4), (2, 0), (3, 5),
        (4, 0), (4, 6), (4, 7),
        (5, 2), (5, 7), (5, 8),
        (6, 10), (7, 11), (8, 6),
        (9, 8),
        (10, 11), (11, 12), (12, 10),
        (13, 14), (14, 15), (15, 13),
    ]
    for i, j in arcs:
        w[i, j] = 1.0
    c = np.zeros(n)
    c[[1, 2, 3]] = 10.0
    return FinancialNetwork(w, c)


@pytest.fixture
def staged_network():
    return make_staged_network()


def shocked_er_network(seed: int, n_max: int = 20, d_max: float = 10.0, shock_max: int = 3):
    """One draw of the randomized clearing testbed (n <= 20, d <= 10, beta 0.05)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1001]))
    n = int(rng.integers(3, n_max + 1))
    d = float(rng.uniform(0.0, min(d_max, n - 1)))
    n_s = int(rng.integers(0, min(shock_max, n) + 1))
    net = generate(GeneratorConfig(n=n, avg_degree=d, seed=derive_seed(seed, 5)))
    return apply_shock(net, ShockConfig(n_s=n_s, seed=derive_seed(seed, 6)))


def small_mixed_network(seed: int):
    """Tiny network (n <= 6) with planted zero-asset sink components.

    A closed unfunded cycle is planted with probability 0.45, so a healthy
    share of draws is non-unique; the rest exercise the unique case.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2002]))
    n = int(rng.integers(2, 7))
    p_arc = float(rng.uniform(0.2, 0.7))
    mask = rng.random((n, n)) < p_arc
    np.fill_diagonal(mask, False)
    w = np.where(mask, rng.uniform(0.5, 10.0, (n, n)), 0.0)
    c = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 5.0, n), 0.0)
    if rng.random() < 0.45:
        k = int(rng.integers(2, min(3, n) + 1))
        comp = rng.choice(n, size=k, replace=False)
        w[comp, :] = 0.0
        cycle = list(comp)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            w[a, b] = float(rng.uniform(0.5, 5.0))
        c[comp] = 0.0
    return FinancialNetwork(w, c, c)


def has_unfunded_sink_component(net) -> bool:
    from clearnet.graph import Digraph, strongly_connected_components

    g = Digraph.from_matrix(net.liabilities)
    report = strongly_connected_components(g)
    for comp, sink, trivial in zip(report.components, report.is_sink, report.is_trivial):
        if sink and not trivial and all(net.assets[i] == 0 for i in comp):
            return True
    return False


def random_substochastic(seed: int, n_max: int = 8):
    """Random substochastic matrix: sparse pattern, rows stochastic or
    clearly deficient (factor in [0.2, 0.95])."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3003]))
    n = int(rng.integers(1, n_max + 1))
    a = np.zeros((n, n))
    for i in range(n):
        k = int(rng.integers(1, n + 1))
        cols = rng.choice(n, size=k, replace=False)
        vals = rng.uniform(0.1, 1.0, size=k)
        a[i, cols] = vals / vals.sum()
        if rng.random() < 0.5:
            a[i] *= rng.uniform(0.2, 0.95)
    return a
