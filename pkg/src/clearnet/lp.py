"""Dense linear-program solver: maximize c^T x s.t. G x <= h, 0 <= x <= u.

Bounded-variable primal simplex in revised (basis-inverse) form. Entering
and leaving variables follow Bland's smallest-index rule throughout, which
guarantees termination on the heavily degenerate programs produced by
clearing problems (the min-structure creates many ties), at some cost in
speed. Reduced costs are re-priced from the basis inverse every iteration
and the inverse is refactorized periodically, so numerical drift stays
bounded over long pivot sequences.

The solver assumes x = 0 is feasible (h >= 0 after a small clip); every
clearing program built in this package satisfies that. Rows with rhs below
-feasibility tolerance yield status "infeasible". With box-bounded
variables the program can never be unbounded; an "unbounded" status
therefore signals an internal numerical failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2

_REFACTOR_EVERY = 300


class LpError(RuntimeError):
    """Solver did not return an optimal vertex."""


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  s.t.  constraint_matrix @ x <= rhs, 0 <= x <= upper_bounds."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    upper_bounds: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.objective, dtype=float))
        g = np.array(self.constraint_matrix, dtype=float)
        if g.size == 0:
            g = g.reshape(-1, c.size)
        h = np.atleast_1d(np.array(self.rhs, dtype=float)) if np.size(self.rhs) else np.zeros(0)
        u = np.atleast_1d(np.array(self.upper_bounds, dtype=float))
        if g.ndim != 2 or g.shape[1] != c.size:
            raise ValueError(
                f"constraint matrix shape {g.shape} inconsistent with {c.size} variables"
            )
        if h.shape != (g.shape[0],):
            raise ValueError(f"rhs length {h.shape} inconsistent with {g.shape[0]} rows")
        if u.shape != (c.size,):
            raise ValueError(f"upper_bounds length {u.shape} inconsistent with {c.size} variables")
        if np.any(u < 0):
            raise ValueError("upper bounds must be nonnegative")
        if not np.all(np.isfinite(u)):
            raise ValueError("upper bounds must be finite")
        for name, arr in (("objective", c), ("constraint_matrix", g), ("rhs", h)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", g)
        object.__setattr__(self, "rhs", h)
        object.__setattr__(self, "upper_bounds", u)

    @property
    def num_variables(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.constraint_matrix.shape[0]


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective_value: float
    status: str  # optimal | infeasible | unbounded | iteration-limit
    iterations: int
    feasibility_residual: float = 0.0
    complementarity_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _Basis:
    """Bookkeeping for the revised simplex: basis inverse and variable states.

    Columns 0..m-1 are the structural variables, m..m+k-1 the slacks.
    """

    def __init__(self, g: np.ndarray, h: np.ndarray, upper: np.ndarray):
        self.g = g
        self.h = h
        k, m = g.shape
        self.m = m
        self.k = k
        self.upper = np.concatenate([upper, np.full(k, np.inf)])
        self.status = np.full(m + k, _AT_LOWER, dtype=np.int8)
        self.basis = np.arange(m, m + k)
        self.status[self.basis] = _BASIC
        self.binv = np.eye(k)
        self.x_basic = h.copy()

    def column(self, j: int) -> np.ndarray:
        if j < self.m:
            return self.g[:, j]
        e = np.zeros(self.k)
        e[j - self.m] = 1.0
        return e

    def tableau_column(self, j: int) -> np.ndarray:
        if j < self.m:
            return self.binv @ self.g[:, j]
        return self.binv[:, j - self.m].copy()

    def reduced_costs(self, c_struct: np.ndarray) -> np.ndarray:
        structural = self.basis < self.m
        cb = np.zeros(self.k)
        if structural.any():
            cb[structural] = c_struct[self.basis[structural]]
        y = cb @ self.binv
        z = np.empty(self.m + self.k)
        z[: self.m] = c_struct - y @ self.g
        z[self.m :] = -y
        return z

    def refactor(self) -> None:
        b = np.empty((self.k, self.k))
        for i, j in enumerate(self.basis):
            b[:, i] = self.column(int(j))
        self.binv = np.linalg.inv(b)
        self.recompute_basics()

    def recompute_basics(self) -> None:
        rhs = self.h.copy()
        up = np.flatnonzero(self.status[: self.m] == _AT_UPPER)
        if up.size:
            rhs -= self.g[:, up] @ self.upper[up]
        self.x_basic = self.binv @ rhs

    def pivot(self, r: int, j: int, w: np.ndarray) -> None:
        # Eliminate the entering column from the inverse: one rank-1 update.
        self.binv[r] /= w[r]
        scale = w.copy()
        scale[r] = 0.0
        self.binv -= np.outer(scale, self.binv[r])


def solve(
    lp: LinearProgram,
    pivot_tol: float = PIVOT_TOL,
    feas_tol: float = FEAS_TOL,
    max_iters: int | None = None,
) -> LpSolution:
    """Run the bounded-variable simplex; deterministic for identical inputs."""
    m = lp.num_variables
    k = lp.num_rows
    total = m + k
    if max_iters is None:
        max_iters = 20_000 + 20 * total

    h = lp.rhs.copy()
    if np.any(h < -feas_tol):
        return LpSolution(
            x=np.zeros(m), objective_value=0.0, status="infeasible", iterations=0
        )
    np.maximum(h, 0.0, out=h)

    state = _Basis(lp.constraint_matrix, h, lp.upper_bounds)
    upper = state.upper
    status = state.status
    # Zero-width variables can never usefully enter; skipping them avoids
    # endless bound flips of length zero.
    enterable = upper > pivot_tol
    # Sign of a profitable move per nonbasic state: +1 at lower, -1 at upper.
    move_sign = np.ones(total)

    final = "iteration-limit"
    iterations = 0
    pivots_since_refactor = 0
    for iterations in range(1, max_iters + 1):
        z = state.reduced_costs(lp.objective)
        np.copyto(move_sign, 1.0)
        move_sign[status == _AT_UPPER] = -1.0
        improving = enterable & (status != _BASIC) & (move_sign * z > pivot_tol)
        if not improving.any():
            final = "optimal"
            iterations -= 1
            break
        j = int(np.argmax(improving))  # Bland: smallest eligible index
        sign = move_sign[j]
        w = state.tableau_column(j)
        direction = sign * w  # basic values move by -t * direction

        # Entries below the column's noise floor are true zeros polluted by
        # roundoff; letting them into the ratio test manufactures tiny
        # pivots and near-singular bases.
        zero_floor = pivot_tol * max(1.0, float(np.abs(direction).max(initial=0.0)) * 10.0)

        t_flip = upper[j]
        t_rows = np.full(k, np.inf)
        pos = direction > zero_floor
        if pos.any():
            t_rows[pos] = state.x_basic[pos] / direction[pos]
        neg = direction < -zero_floor
        if neg.any():
            ub_basic = upper[state.basis]
            capped = neg & np.isfinite(ub_basic)
            t_rows[capped] = (ub_basic[capped] - state.x_basic[capped]) / -direction[capped]
        t_row_min = float(t_rows.min()) if k else np.inf
        t_star = min(t_row_min, t_flip)
        if not np.isfinite(t_star):
            final = "unbounded"
            break
        t_star = max(t_star, 0.0)

        if t_row_min <= t_flip:
            # Pivot. Rows whose variable would land within 1e-9 of its bound
            # at the chosen step are all legitimate leaving candidates (the
            # snap error is below the feasibility tolerance). Among them,
            # discard small pivot magnitudes first (a small pivot makes the
            # next basis ill-conditioned), then apply Bland's rule:
            # smallest variable index.
            snap = np.full(k, np.inf)
            finite = np.isfinite(t_rows)
            snap[finite] = (t_rows[finite] - t_star) * np.abs(direction[finite])
            blocking = np.flatnonzero(snap <= 1e-9)
            pivot_sizes = np.abs(direction[blocking])
            safe = blocking[pivot_sizes >= 1e-2 * pivot_sizes.max()]
            r = int(safe[np.argmin(state.basis[safe])])
            state.x_basic -= t_star * direction
            leaving = int(state.basis[r])
            status[leaving] = _AT_LOWER if direction[r] > 0 else _AT_UPPER
            state.pivot(r, j, w)
            status[j] = _BASIC
            state.basis[r] = j
            state.x_basic[r] = t_star if sign > 0 else upper[j] - t_star
            pivots_since_refactor += 1
            if pivots_since_refactor >= _REFACTOR_EVERY or abs(direction[r]) < zero_floor * 100:
                state.refactor()
                pivots_since_refactor = 0
        else:
            # Bound flip: the entering variable crosses to its other bound.
            state.x_basic -= t_star * direction
            status[j] = _AT_UPPER if status[j] == _AT_LOWER else _AT_LOWER

    if final == "optimal" and k:
        state.recompute_basics()

    x_full = np.zeros(total)
    at_upper = status == _AT_UPPER
    x_full[at_upper] = upper[at_upper]
    x_full[state.basis] = state.x_basic
    x = np.clip(x_full[:m], 0.0, lp.upper_bounds)

    row_resid = lp.constraint_matrix @ x - lp.rhs if k else np.zeros(0)
    box_resid = np.maximum(x_full[:m] - lp.upper_bounds, -x_full[:m])
    feas_resid = float(
        max(row_resid.max(initial=0.0), box_resid.max(initial=0.0), 0.0)
    )
    if final == "optimal" and feas_resid > feas_tol:
        final = "iteration-limit"  # numerical drift: do not report a bad vertex as optimal

    comp = 0.0
    if final == "optimal":
        z = state.reduced_costs(lp.objective)
        duals = -z[m:]
        if k:
            slack = lp.rhs - lp.constraint_matrix @ x
            comp = float(np.abs(duals * slack).max(initial=0.0))
        gaps = np.where(z[:m] > 0, lp.upper_bounds - x, x)
        comp = max(comp, float(np.abs(z[:m] * gaps).max(initial=0.0)))

    return LpSolution(
        x=x,
        objective_value=float(lp.objective @ x),
        status=final,
        iterations=iterations,
        feasibility_residual=feas_resid,
        complementarity_residual=comp,
    )


def solve_or_raise(lp: LinearProgram, **kwargs) -> LpSolution:
    sol = solve(lp, **kwargs)
    if not sol.ok:
        raise LpError(
            f"LP solve failed with status {sol.status!r} after {sol.iterations} iterations"
        )
    return sol
