"""Uniqueness analysis and parameterization of all clearing vectors.

The dominant vector fixes most payments. Working outward from the nodes
that have external assets or no obligations (and everything with a
liability chain into them), a staged reduction claims further nodes as
their stage in-flows become known. Whatever remains is a closed,
asset-free block on which payments are free: any fixed point of the
block's pro-rata matrix inside the box completes a clearing vector. The
clearing vector is unique exactly when that block is empty, which is
equivalent to every non-trivial sink component of the liability graph
touching (or being fed from) a node with assets.

A subset-enumeration oracle for small networks recovers the full set of
clearing vectors independently of the staged reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clearing_vector import dominant_vector_lp
from .graph import (
    Digraph,
    reachable_from,
    reachable_to,
    strongly_connected_components,
)
from .model import (
    DEFAULT_TOL,
    FinancialNetwork,
    clearing_vector_residual,
    relative_liabilities,
)


class ClearingSetError(RuntimeError):
    """Internal inconsistency while resolving the clearing set."""


@dataclass(frozen=True)
class StageRecord:
    """One stage of the reduction.

    ``active`` is the still-unclaimed node set entering the stage,
    ``inflow_support`` the nodes whose stage in-flow is positive,
    ``sources`` the stage's seed set and ``closure`` everything claimed by
    the stage (sources plus nodes with liability chains into them).
    """

    stage: int
    active: frozenset[int]
    inflow_support: frozenset[int]
    sources: frozenset[int]
    closure: frozenset[int]


@dataclass(frozen=True)
class ClearingSet:
    """All clearing vectors of a network: fixed coordinates plus a free block.

    Every clearing vector equals ``p_star`` on ``fixed_nodes``; on
    ``free_nodes`` it can be any vector xi with free_matrix^T xi = xi and
    0 <= xi <= free_bounds. ``is_unique`` means the free block is empty.
    """

    net: FinancialNetwork
    p_star: np.ndarray
    fixed_nodes: frozenset[int]
    free_nodes: tuple[int, ...]
    free_matrix: np.ndarray
    free_bounds: np.ndarray
    is_unique: bool


def sufficient_uniqueness(net: FinancialNetwork) -> tuple[bool, frozenset[int]]:
    """Reachability test: sinks and funded nodes, plus everything upstream.

    Returns (unique, fixed) where ``fixed`` collects all nodes with a
    liability chain into a funded node or a sink; payments there coincide
    for every clearing vector. When ``fixed`` covers the whole network the
    clearing vector is unique. The test is sufficient, not necessary.
    """
    g = Digraph.from_matrix(net.liabilities)
    p_bar = net.total_out
    seeds = set(np.flatnonzero(net.assets > 0)) | set(np.flatnonzero(p_bar <= 0))
    fixed = reachable_to(g, seeds)
    return len(fixed) == net.n, fixed


def sink_component_uniqueness(net: FinancialNetwork) -> bool:
    """Necessary and sufficient graph test, independent of the dominant vector.

    The clearing vector is unique iff every non-trivial sink component of
    the liability graph contains a funded node or lies downstream of one.
    """
    g = Digraph.from_matrix(net.liabilities)
    touched = reachable_from(g, np.flatnonzero(net.assets > 0))
    report = strongly_connected_components(g)
    for comp, sink, trivial in zip(report.components, report.is_sink, report.is_trivial):
        if sink and not trivial and not (comp & touched):
            return False
    return True


def resolve_clearing_set(
    net: FinancialNetwork, p_star=None, tol: float = DEFAULT_TOL
) -> tuple[ClearingSet, tuple[StageRecord, ...]]:
    """Staged reduction that classifies every node as fixed or free.

    Stage 0 claims sinks, funded nodes and everything upstream of them.
    Each later stage computes the in-flow paid into the unclaimed block by
    the previously claimed nodes (using the dominant vector), seeds on its
    support, and again claims everything upstream within the block. The
    loop stops when nothing is left or the in-flow vanishes; a nonempty
    remainder is the free block of the parameterization.
    """
    n = net.n
    if p_star is None:
        p_star = dominant_vector_lp(net).p_star
    p_star = np.asarray(p_star, dtype=float)
    if float(clearing_vector_residual(net, p_star).max(initial=0.0)) > 1e-6:
        raise ValueError("p_star is not a clearing vector for this network")

    rl = relative_liabilities(net)
    a = rl.a
    g = Digraph.from_matrix(net.liabilities)
    p_bar = rl.total_out

    funded = frozenset(int(i) for i in np.flatnonzero(net.assets > 0))
    sinks = frozenset(int(i) for i in np.flatnonzero(p_bar <= 0))
    seeds = funded | sinks
    closure = reachable_to(g, seeds)
    records = [
        StageRecord(
            stage=0,
            active=frozenset(range(n)),
            inflow_support=funded,
            sources=seeds,
            closure=closure,
        )
    ]
    claimed = set(closure)
    prev_closure = closure

    free: tuple[int, ...] = ()
    while True:
        active = frozenset(range(n)) - claimed
        if not active:
            break
        donors = sorted(prev_closure)
        inflow = a[donors].T @ p_star[donors] if donors else np.zeros(n)
        support = frozenset(int(i) for i in active if inflow[i] > tol)
        stage = records[-1].stage + 1
        if not support:
            records.append(
                StageRecord(
                    stage=stage,
                    active=active,
                    inflow_support=frozenset(),
                    sources=frozenset(),
                    closure=frozenset(),
                )
            )
            free = tuple(sorted(active))
            break
        closure = frozenset(reachable_to(g, support) & active)
        records.append(
            StageRecord(
                stage=stage,
                active=active,
                inflow_support=support,
                sources=support,
                closure=closure,
            )
        )
        claimed |= closure
        prev_closure = closure
        if stage > n:
            raise ClearingSetError("stage reduction failed to terminate")

    fixed = frozenset(range(n)) - set(free)
    free_matrix = a[np.ix_(free, free)] if free else np.zeros((0, 0))
    if free:
        rows = free_matrix.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-9):
            raise ClearingSetError("free block is not closed; reduction is inconsistent")
    cs = ClearingSet(
        net=net,
        p_star=p_star,
        fixed_nodes=fixed,
        free_nodes=free,
        free_matrix=free_matrix,
        free_bounds=p_bar[list(free)] if free else np.zeros(0),
        is_unique=not free,
    )
    return cs, tuple(records)


def _stationary_vector(block: np.ndarray) -> np.ndarray:
    """Positive row vector pi with block^T pi = pi, sum pi = 1.

    ``block`` must be an irreducible stochastic matrix.
    """
    d = block.shape[0]
    if d == 1:
        return np.ones(1)
    m = np.vstack([block.T - np.eye(d), np.ones((1, d))])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    if np.any(pi < -1e-9):
        raise ClearingSetError("stationary vector came out negative; block not irreducible?")
    pi = np.maximum(pi, 0.0)
    return pi / pi.sum()


def _free_segments(cs: ClearingSet):
    """Per sink component of the free block: (indices into free_nodes, xi_max).

    The feasible free vectors are exactly the products of segments
    [0, xi_max] over the block's sink components; other free coordinates
    are forced to zero.
    """
    free = list(cs.free_nodes)
    if not free:
        return []
    sub = Digraph.from_matrix(cs.free_matrix)
    report = strongly_connected_components(sub)
    segments = []
    for comp, sink in zip(report.components, report.is_sink):
        if not sink:
            continue
        idx = sorted(comp)
        pi = _stationary_vector(cs.free_matrix[np.ix_(idx, idx)])
        if np.any(pi <= 0):
            raise ClearingSetError("sink component stationary vector has zero entries")
        scale = float(np.min(cs.free_bounds[idx] / pi))
        segments.append((idx, pi * scale))
    return segments


def sample_clearing_vectors(cs: ClearingSet, count: int = 10, seed: int = 0) -> list[np.ndarray]:
    """Draw clearing vectors; a unique set yields the single dominant vector.

    The free block's fixed points form a product of line segments, one per
    sink component of the block; each draw scales every segment by an
    independent uniform coefficient. Every returned vector is verified
    against the clearing equation.
    """
    if cs.is_unique:
        samples = [cs.p_star.copy()]
    else:
        rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
        segments = _free_segments(cs)
        if not segments:
            raise ClearingSetError("nonempty free block without sink components")
        free = list(cs.free_nodes)
        samples = []
        for _ in range(count):
            p = cs.p_star.copy()
            p[free] = 0.0
            for positions, xi_max in segments:
                coeff = rng.uniform(0.0, 1.0)
                for value, pos in zip(coeff * xi_max, positions):
                    p[free[pos]] = value
            samples.append(p)
    for p in samples:
        resid = float(clearing_vector_residual(cs.net, p).max(initial=0.0))
        if resid > 1e-8:
            raise ClearingSetError(f"sampled vector violates clearing equation by {resid}")
    return samples


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OraclePiece:
    """One affine piece of the clearing set, found under a candidate default set.

    The piece is ``point + sum_c t_c * directions[c]`` for t_c inside
    ``intervals[c]``; direction supports are disjoint, so the per-coordinate
    ranges ``lower``/``upper`` describe the piece exactly.
    """

    default_candidates: frozenset[int]
    point: np.ndarray
    directions: tuple[np.ndarray, ...]
    intervals: tuple[tuple[float, float], ...]
    lower: np.ndarray
    upper: np.ndarray

    @property
    def dimension(self) -> int:
        return sum(1 for lo, hi in self.intervals if hi - lo > 1e-12)

    def contains(self, p, tol: float = 1e-8) -> bool:
        p = np.asarray(p, dtype=float)
        resid = p - self.point
        for v, (lo, hi) in zip(self.directions, self.intervals):
            t = float(v @ resid) / float(v @ v)
            if not (lo - tol <= t <= hi + tol):
                return False
            resid = resid - t * v
        return bool(np.abs(resid).max(initial=0.0) <= tol)


@dataclass(frozen=True)
class EnumeratedClearingSet:
    """Union of affine pieces plus exact per-coordinate payment ranges."""

    pieces: tuple[OraclePiece, ...]
    lower: np.ndarray
    upper: np.ndarray
    tol: float

    @property
    def is_single_point(self) -> bool:
        return bool(np.all(self.upper - self.lower <= self.tol))

    @property
    def single_point(self) -> np.ndarray:
        if not self.is_single_point:
            raise ValueError("clearing set is not a single point")
        return self.pieces[0].point


def _closed_stochastic_classes(a: np.ndarray, subset: list[int], tol: float):
    """Strongly connected classes of the subset that keep all mass inside.

    These generate the null directions of the default-set system: the class
    submatrix is irreducible stochastic, so it owns a positive stationary
    vector.
    """
    sub = a[np.ix_(subset, subset)]
    report = strongly_connected_components(Digraph.from_matrix(sub))
    classes = []
    for comp in report.components:
        idx = sorted(comp)
        if np.all(np.abs(sub[np.ix_(idx, idx)].sum(axis=1) - 1.0) <= tol):
            classes.append([subset[i] for i in idx])
    return classes


def brute_force_clearing_set(net: FinancialNetwork, tol: float = 1e-8) -> EnumeratedClearingSet:
    """Enumerate every candidate default set and solve the induced system.

    For a candidate set J the non-defaulting nodes pay in full and the
    defaulting ones satisfy a linear system; when the system is singular
    its solution set is the particular solution plus stationary directions
    of closed stochastic classes inside J. Each survivor is filtered
    against the box and the clearing equation. Exponential in n; restricted
    to n <= 10.
    """
    n = net.n
    if n > 10:
        raise ValueError(f"enumeration oracle limited to n <= 10, got {n}")
    a = relative_liabilities(net).a
    p_bar = net.total_out
    c = net.assets

    pieces: list[OraclePiece] = []
    seen_keys = set()
    for mask in range(1 << n):
        subset = [i for i in range(n) if mask >> i & 1]
        others = [i for i in range(n) if not mask >> i & 1]

        classes = _closed_stochastic_classes(a, subset, tol) if subset else []
        class_nodes = set(i for cls in classes for i in cls)

        p = p_bar.copy()
        if subset:
            # w_i = c_i + payments received from full payers
            w = c[subset] + a[np.ix_(others, subset)].T @ p_bar[others] if others else c[subset].copy()
            m = np.eye(len(subset)) - a[np.ix_(subset, subset)].T
            if classes:
                sol, *_ = np.linalg.lstsq(m, w, rcond=None)
                if np.abs(m @ sol - w).max(initial=0.0) > tol:
                    continue  # inconsistent system: no clearing vector with this pattern
            else:
                try:
                    sol = np.linalg.solve(m, w)
                except np.linalg.LinAlgError:
                    continue
            p[subset] = sol

        directions = []
        intervals = []
        feasible = True
        for cls in classes:
            pi = _stationary_vector(a[np.ix_(cls, cls)])
            v = np.zeros(n)
            v[cls] = pi
            lo = float(np.max(-p[cls] / pi))
            hi = float(np.min((p_bar[cls] - p[cls]) / pi))
            if lo > hi + tol:
                feasible = False
                break
            lo = min(lo, hi)
            directions.append(v)
            intervals.append((lo, hi))
        if not feasible:
            continue

        # Coordinates outside the free classes must already sit in the box.
        static = [i for i in subset if i not in class_nodes]
        if static and (
            np.any(p[static] < -tol) or np.any(p[static] > p_bar[static] + tol)
        ):
            continue

        # Clearing equation at a representative corner; constraints are
        # invariant along the directions for all other coordinates.
        corner_lo = p.copy()
        corner_hi = p.copy()
        for v, (lo, hi) in zip(directions, intervals):
            corner_lo += lo * v
            corner_hi += hi * v
        if float(clearing_vector_residual(net, corner_lo).max(initial=0.0)) > tol:
            continue
        if directions and float(clearing_vector_residual(net, corner_hi).max(initial=0.0)) > tol:
            continue

        lower = p.copy()
        upper = p.copy()
        for v, (lo, hi) in zip(directions, intervals):
            lower += lo * v
            upper += hi * v

        key = (tuple(np.round(lower, 9)), tuple(np.round(upper, 9)))
        if key in seen_keys:
            continue
        seen_keys.add(key)
        pieces.append(
            OraclePiece(
                default_candidates=frozenset(subset),
                point=corner_lo,
                directions=tuple(directions),
                intervals=tuple(intervals),
                lower=lower,
                upper=upper,
            )
        )

    if not pieces:
        raise ClearingSetError("oracle found no clearing vector; one always exists")

    # Drop isolated points that lie inside a higher-dimensional piece.
    kept = []
    for piece in pieces:
        if piece.dimension == 0 and any(
            other.dimension > 0 and other.contains(piece.point, tol) for other in pieces
        ):
            continue
        kept.append(piece)

    lower = np.min([p.lower for p in kept], axis=0)
    upper = np.max([p.upper for p in kept], axis=0)
    return EnumeratedClearingSet(pieces=tuple(kept), lower=lower, upper=upper, tol=tol)
