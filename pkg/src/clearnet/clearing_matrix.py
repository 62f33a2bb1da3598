"""Optimal clearing payments without the pro-rata rule.

Dropping pro-rata turns the payment vector into an entrywise payment
matrix. Total payments are maximized by a linear program over the arc
entries; any optimal vertex settles the network, but the optimum is
generally non-unique and the set of clearing matrices has no maximal
element — a three-node network with one funded debtor and two sink
creditors already exhibits two incomparable extreme matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .model import (
    DEFAULT_TOL,
    FinancialNetwork,
    PaymentMatrix,
    check_clearing_matrix,
    check_clearing_vector,
    relative_liabilities,
)


def prorata_matrix(net: FinancialNetwork, payments, tol: float = 1e-8) -> PaymentMatrix:
    """Spread a clearing vector over creditors proportionally to claims."""
    p = np.asarray(payments, dtype=float)
    report = check_clearing_vector(net, p, tol=tol)
    if not report.ok:
        raise ValueError(
            f"payments violate the clearing equation by {report.max_violation} > {tol}"
        )
    a = relative_liabilities(net).a
    entries = p[:, None] * a
    np.fill_diagonal(entries, 0.0)  # sink rows carry a diagonal share of a zero payment
    return PaymentMatrix(entries)


def optimal_matrix_lp(net: FinancialNetwork) -> PaymentMatrix:
    """Maximize total payments over all feasible payment matrices.

    Only arcs with a positive nominal liability become variables. The
    result is *an* optimal clearing matrix: any optimum settles the
    network, ties are broken deterministically by the solver, and only the
    objective value is unique.
    """
    n = net.n
    arcs = np.argwhere(net.liabilities > 0)
    m = len(arcs)
    if m == 0:
        return PaymentMatrix(np.zeros((n, n)))
    g = np.zeros((n, m))
    for e, (i, j) in enumerate(arcs):
        g[i, e] += 1.0  # outflow from the debtor
        g[j, e] -= 1.0  # inflow to the creditor
    program = lp.LinearProgram(
        objective=np.ones(m),
        constraint_matrix=g,
        rhs=net.assets.copy(),
        upper_bounds=net.liabilities[arcs[:, 0], arcs[:, 1]],
    )
    sol = lp.solve_or_raise(program)
    entries = np.zeros((n, n))
    entries[arcs[:, 0], arcs[:, 1]] = sol.x
    pm = PaymentMatrix(entries)
    report = check_clearing_matrix(net, pm, tol=1e-6)
    if not report.ok:
        raise lp.LpError(
            f"optimal matrix violates the clearing equation by {report.max_violation}"
        )
    return pm


def system_loss(net: FinancialNetwork, pm: PaymentMatrix) -> float:
    """Total shortfall between nominal and actual payments."""
    return float((net.total_out - pm.entries.sum(axis=1)).sum())


@dataclass(frozen=True)
class NoMaximalReport:
    """Two extreme clearing matrices and why no matrix dominates both.

    ``capacity`` is what the debtor can pay in total; when the entrywise
    maximum of the extremes needs more than that, nothing above both can
    clear, so the clearing-matrix set has no maximal element
    (``has_maximal`` False).
    """

    first: PaymentMatrix
    second: PaymentMatrix
    entrywise_max: PaymentMatrix
    capacity: float
    excess_outflow: float
    has_maximal: bool


def demonstrate_no_maximal(net: FinancialNetwork, tol: float = DEFAULT_TOL) -> NoMaximalReport:
    """Build the two extreme clearing matrices of a two-creditor network.

    Requires the shape: three nodes, a single debtor owing both others,
    the creditors being unfunded sinks. The extremes pay the whole
    capacity to one creditor first (clipped by the claim), then the other.
    """
    if net.n != 3:
        raise ValueError(f"network must have 3 nodes, got {net.n}")
    p_bar = net.total_out
    debtors = np.flatnonzero(p_bar > 0)
    if len(debtors) != 1:
        raise ValueError("network must have exactly one debtor node")
    d = int(debtors[0])
    creditors = [i for i in range(3) if i != d]
    if any(net.liabilities[d, i] <= 0 for i in creditors):
        raise ValueError("the debtor must owe both other nodes")
    if any(net.assets[i] != 0 for i in creditors):
        raise ValueError("creditor nodes must hold no external assets")

    capacity = float(min(p_bar[d], net.assets[d]))

    def greedy(order):
        entries = np.zeros((3, 3))
        remaining = capacity
        for i in order:
            pay = min(remaining, float(net.liabilities[d, i]))
            entries[d, i] = pay
            remaining -= pay
        return PaymentMatrix(entries)

    first = greedy(creditors)
    second = greedy(creditors[::-1])
    sup = PaymentMatrix(np.maximum(first.entries, second.entries))
    sup_outflow = float(sup.entries[d].sum())
    excess = max(sup_outflow - capacity, 0.0)
    return NoMaximalReport(
        first=first,
        second=second,
        entrywise_max=sup,
        capacity=capacity,
        excess_outflow=excess,
        has_maximal=excess <= tol,
    )
