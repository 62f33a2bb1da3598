"""Dominant clearing vector under the pro-rata rule.

Two independent methods compute the same vector: a linear program that
maximizes total payments over the feasible polytope, and the monotone
fixed-point iteration that starts from the nominal obligations and lowers
defaulted payments until they settle. The LP is authoritative; the
iteration is the cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .graph import Digraph, reachable_from, strongly_connected_components
from .model import DEFAULT_TOL, FinancialNetwork, relative_liabilities


@dataclass(frozen=True)
class DominantVector:
    """The maximal clearing vector, with provenance of the computation."""

    p_star: np.ndarray
    method: str  # "lp" | "fictitious_default"
    iterations: int = 0
    converged: bool = True


def feasible_constraints(net: FinancialNetwork):
    """Rows G, rhs c of the feasibility system G p <= c, 0 <= p <= p_bar.

    G = I - A^T, so feasibility says each node pays no more than assets
    plus received payments.
    """
    a = relative_liabilities(net).a
    g = np.eye(net.n) - a.T
    return g, net.assets.copy()


def dominant_vector_lp(net: FinancialNetwork) -> DominantVector:
    """Maximize total payments over the feasible polytope.

    Total received in-flow differs from total payments by a constant, so
    this objective is strictly decreasing in the shortfall and the optimum
    is the unique dominant vector.
    """
    g, rhs = feasible_constraints(net)
    program = lp.LinearProgram(
        objective=np.ones(net.n),
        constraint_matrix=g,
        rhs=rhs,
        upper_bounds=net.total_out,
    )
    sol = lp.solve_or_raise(program)
    return DominantVector(p_star=sol.x, method="lp", iterations=sol.iterations)


def dominant_vector_fda(
    net: FinancialNetwork, max_iters: int | None = None, tol: float = 1e-10
) -> DominantVector:
    """Iterate p <- min(p_bar, c + A^T p) from p = p_bar.

    The sequence is monotone nonincreasing and converges to the dominant
    vector; convergence is asymptotic, so the stop rule is a sup-norm step
    tolerance with a safety cap of 10 n^2 iterations. A hit cap surfaces as
    ``converged=False`` so callers may fall back to the LP.
    """
    n = net.n
    if max_iters is None:
        max_iters = max(10 * n * n, 10)
    a_t = relative_liabilities(net).a.T
    p_bar = net.total_out
    c = net.assets
    p = p_bar.copy()
    for it in range(1, max_iters + 1):
        p_next = np.minimum(p_bar, c + a_t @ p)
        delta = float(np.abs(p_next - p).max(initial=0.0))
        p = p_next
        if delta <= tol:
            return DominantVector(
                p_star=p, method="fictitious_default", iterations=it, converged=True
            )
    return DominantVector(
        p_star=p, method="fictitious_default", iterations=max_iters, converged=False
    )


def fda_trace(net: FinancialNetwork, max_iters: int | None = None, tol: float = 1e-10):
    """All iterates of the fictitious-default iteration, first to last."""
    n = net.n
    if max_iters is None:
        max_iters = max(10 * n * n, 10)
    a_t = relative_liabilities(net).a.T
    p_bar = net.total_out
    c = net.assets
    trace = [p_bar.copy()]
    for _ in range(max_iters):
        p_next = np.minimum(p_bar, c + a_t @ trace[-1])
        delta = float(np.abs(p_next - trace[-1]).max(initial=0.0))
        trace.append(p_next)
        if delta <= tol:
            break
    return trace


def predict_positive_support(net: FinancialNetwork) -> frozenset[int]:
    """Nodes whose dominant payment is strictly positive.

    A non-sink node pays something iff it has external assets, sits
    downstream of a node that does, or belongs to a sink component of the
    liability graph.
    """
    p_bar = net.total_out
    g = Digraph.from_matrix(net.liabilities)
    funded = np.flatnonzero(net.assets > 0)
    downstream = reachable_from(g, funded)
    report = strongly_connected_components(g)
    support = set()
    for i in range(net.n):
        if p_bar[i] <= 0:
            continue
        if i in downstream:
            support.add(i)
            continue
        ci = report.component_index[i]
        if report.is_sink[ci]:
            support.add(i)
    return frozenset(support)
