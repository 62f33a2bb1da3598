"""Directed-graph analysis on nonnegative matrices.

Reachability, strongly connected components with sink/trivial flags, and the
stability test for substochastic matrices: such a matrix has spectral radius
below one exactly when its deficiency set (rows summing below one) can be
reached from every node, equivalently when no principal submatrix is
stochastic.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

#: Row-sum slack for classifying a row as deficient; rows built from exact
#: ratios only deviate by floating-point noise.
ROW_DEFICIENCY_TOL = 1e-12


@dataclass(frozen=True)
class Digraph:
    """Immutable digraph given by per-node successor and predecessor lists."""

    n: int
    successors: tuple[tuple[int, ...], ...]
    predecessors: tuple[tuple[int, ...], ...]

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> "Digraph":
        succ = [[] for _ in range(n)]
        pred = [[] for _ in range(n)]
        for i, j in arcs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"arc ({i}, {j}) out of range for n={n}")
            succ[i].append(j)
            pred[j].append(i)
        return cls(
            n=n,
            successors=tuple(tuple(sorted(set(s))) for s in succ),
            predecessors=tuple(tuple(sorted(set(p))) for p in pred),
        )

    @classmethod
    def from_matrix(cls, a) -> "Digraph":
        """Graph with an arc (i, j) wherever a[i, j] > 0."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        arcs = [(int(i), int(j)) for i, j in np.argwhere(a > 0)]
        return cls.from_arcs(a.shape[0], arcs)

    def arcs(self):
        for i, out in enumerate(self.successors):
            for j in out:
                yield (i, j)


def reachable_to(g: Digraph, targets: Iterable[int]) -> frozenset[int]:
    """Nodes from which some target can be reached (targets included).

    Reverse breadth-first search from the target set.
    """
    seen = set(int(t) for t in targets)
    if not seen <= set(range(g.n)):
        raise ValueError("targets out of range")
    queue = deque(seen)
    while queue:
        j = queue.popleft()
        for i in g.predecessors[j]:
            if i not in seen:
                seen.add(i)
                queue.append(i)
    return frozenset(seen)


def reachable_from(g: Digraph, sources: Iterable[int]) -> frozenset[int]:
    """Nodes reachable from some source via a walk (sources included)."""
    seen = set(int(s) for s in sources)
    if not seen <= set(range(g.n)):
        raise ValueError("sources out of range")
    queue = deque(seen)
    while queue:
        i = queue.popleft()
        for j in g.successors[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return frozenset(seen)


@dataclass(frozen=True)
class CondensationReport:
    """SCC partition with per-component sink and trivial flags.

    A component is a sink when no arc leaves it, and trivial when it is a
    single node without a self-arc.
    """

    components: tuple[frozenset[int], ...]
    is_sink: tuple[bool, ...]
    is_trivial: tuple[bool, ...]
    component_index: tuple[int, ...]

    def sink_components(self) -> list[frozenset[int]]:
        return [c for c, s in zip(self.components, self.is_sink) if s]

    def component_of(self, node: int) -> frozenset[int]:
        return self.components[self.component_index[node]]


def strongly_connected_components(g: Digraph) -> CondensationReport:
    """Tarjan's algorithm with an explicit stack (no recursion limits)."""
    index = [-1] * g.n
    lowlink = [0] * g.n
    on_stack = [False] * g.n
    stack: list[int] = []
    components: list[frozenset[int]] = []
    comp_index = [-1] * g.n
    counter = 0

    for root in range(g.n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            succ = g.successors[v]
            for k in range(pi, len(succ)):
                w = succ[k]
                if index[w] == -1:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if recurse:
                continue
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_index[w] = len(components)
                    comp.append(w)
                    if w == v:
                        break
                components.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])

    is_sink = []
    is_trivial = []
    for ci, comp in enumerate(components):
        sink = True
        for v in comp:
            if any(comp_index[w] != ci for w in g.successors[v]):
                sink = False
                break
        is_sink.append(sink)
        trivial = len(comp) == 1 and all(w != v for v in comp for w in g.successors[v])
        is_trivial.append(trivial)

    return CondensationReport(
        components=tuple(components),
        is_sink=tuple(is_sink),
        is_trivial=tuple(is_trivial),
        component_index=tuple(comp_index),
    )


def _validate_substochastic(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise ValueError(f"entry ({i}, {j}) is negative")
    rows = a.sum(axis=1)
    if np.any(rows > 1.0 + ROW_DEFICIENCY_TOL):
        i = int(np.argmax(rows))
        raise ValueError(f"row {i} sums to {rows[i]} > 1; matrix is not substochastic")
    return a


def is_schur_stable_substochastic(a) -> bool:
    """True iff the substochastic matrix has spectral radius < 1.

    Graph criterion: the deficiency set {i : sum_j a_ij < 1} must be
    reachable from every node. A row-stochastic matrix (empty deficiency
    set) is never stable.
    """
    a = _validate_substochastic(a)
    n = a.shape[0]
    if n == 0:
        return True
    deficient = np.flatnonzero(a.sum(axis=1) < 1.0 - ROW_DEFICIENCY_TOL)
    if deficient.size == 0:
        return False
    g = Digraph.from_matrix(a)
    return len(reachable_to(g, deficient)) == n


def has_stochastic_principal_submatrix(a, tol: float = 1e-9) -> bool:
    """Exhaustively test all index subsets; exponential, intended for n <= 8."""
    a = _validate_substochastic(a)
    n = a.shape[0]
    if n > 16:
        raise ValueError(f"subset enumeration limited to n <= 16, got {n}")
    for mask in range(1, 1 << n):
        subset = [i for i in range(n) if mask >> i & 1]
        sub = a[np.ix_(subset, subset)]
        if np.all(np.abs(sub.sum(axis=1) - 1.0) <= tol):
            return True
    return False


def spectral_radius(a, iters: int = 5000, tol: float = 1e-10) -> float:
    """Power-iteration estimate of the spectral radius of a nonnegative matrix.

    Iterates on a + I (which shifts the dominant root by exactly one while
    separating it from other peripheral eigenvalues, so cycles converge too)
    and reports the norm-growth rate minus one. Reliable on irreducible
    inputs; a diagnostic only. Warns on non-convergence within ``iters``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if np.any(a < 0):
        raise ValueError("matrix must be nonnegative")
    n = a.shape[0]
    if n == 0:
        return 0.0
    shifted = a + np.eye(n)
    x = np.ones(n)
    est = 1.0
    stable = 0
    for _ in range(iters):
        y = shifted @ x
        norm = float(np.abs(y).sum())
        if norm == 0.0:
            return 0.0
        new_est = norm / float(np.abs(x).sum())
        x = y / norm
        if abs(new_est - est) <= tol * max(1.0, abs(new_est)):
            stable += 1
            if stable >= 3:
                return new_est - 1.0
        else:
            stable = 0
        est = new_est
    warnings.warn(
        f"spectral radius estimate did not converge within {iters} iterations",
        RuntimeWarning,
        stacklevel=2,
    )
    return est - 1.0
