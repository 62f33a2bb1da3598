"""Core data types for financial liability networks.

A network is a set of n institutions with a nonnegative matrix of mutual
liabilities (entry (i, j) is what i owes j) and a vector of external assets.
Payments settle simultaneously under limited liability and debt priority:
a payment vector p is *clearing* when p = min(p_bar, c + A^T p), where p_bar
holds the nominal obligations and A the pro-rata shares of each debt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

#: Absolute tolerance (currency units) for equality/min comparisons and
#: default detection. Experiment magnitudes stay below 1e4, so an absolute
#: tolerance is adequate.
DEFAULT_TOL = 1e-9

#: Tolerance for classifying rows of the relative-liability matrix; its rows
#: are exact ratios, so deviations from 1 are pure floating-point noise.
ROW_SUM_TOL = 1e-12


class NetworkError(ValueError):
    """Invalid network data: bad shapes, negative entries, asset bounds."""


class NegativeEquityError(ValueError):
    """A payment vector produced equity below -tol; it is not clearing."""


def _frozen(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FinancialNetwork:
    """Immutable liability network with nominal and post-shock assets.

    ``liabilities[i, j]`` is the nominal payment due from node i to node j.
    ``nominal_assets`` are the pre-shock external assets, ``assets`` the
    current (possibly shocked) ones. Outside liabilities are not modeled;
    payments to the external sector go to an explicit sink node.
    """

    liabilities: np.ndarray
    nominal_assets: np.ndarray
    assets: np.ndarray | None = None

    def __post_init__(self):
        liab = np.array(self.liabilities, dtype=float)
        if liab.ndim != 2 or liab.shape[0] != liab.shape[1]:
            raise NetworkError(f"liabilities must be square, got shape {liab.shape}")
        n = liab.shape[0]
        bad = np.argwhere(liab < 0)
        if bad.size:
            i, j = bad[0]
            raise NetworkError(f"liabilities[{i}, {j}] is negative ({liab[i, j]})")
        diag = np.argwhere(np.diagonal(liab) != 0)
        if diag.size:
            i = int(diag[0][0])
            raise NetworkError(f"liabilities[{i}, {i}] must be zero (no self-claims)")

        nominal = np.array(self.nominal_assets, dtype=float)
        if nominal.shape != (n,):
            raise NetworkError(
                f"nominal_assets must have length {n}, got shape {nominal.shape}"
            )
        bad = np.argwhere(nominal < 0)
        if bad.size:
            i = int(bad[0][0])
            raise NetworkError(f"nominal_assets[{i}] is negative ({nominal[i]})")

        assets = nominal.copy() if self.assets is None else np.array(self.assets, dtype=float)
        if assets.shape != (n,):
            raise NetworkError(f"assets must have length {n}, got shape {assets.shape}")
        bad = np.argwhere(assets < 0)
        if bad.size:
            i = int(bad[0][0])
            raise NetworkError(f"assets[{i}] is negative ({assets[i]})")
        bad = np.argwhere(assets > nominal)
        if bad.size:
            i = int(bad[0][0])
            raise NetworkError(
                f"assets[{i}] = {assets[i]} exceeds nominal_assets[{i}] = {nominal[i]}"
            )

        object.__setattr__(self, "liabilities", _frozen(liab))
        object.__setattr__(self, "nominal_assets", _frozen(nominal))
        object.__setattr__(self, "assets", _frozen(assets))

    @property
    def n(self) -> int:
        return self.liabilities.shape[0]

    @property
    def total_out(self) -> np.ndarray:
        """Nominal total obligation of each node (row sums)."""
        return self.liabilities.sum(axis=1)

    @property
    def nominal_inflow(self) -> np.ndarray:
        """Nominal asset side: external assets plus incoming claims."""
        return self.nominal_assets + self.liabilities.sum(axis=0)

    def shocked(self, assets) -> "FinancialNetwork":
        """Same network with a replacement post-shock asset vector."""
        return FinancialNetwork(self.liabilities, self.nominal_assets, assets)


@dataclass(frozen=True)
class RelativeLiabilities:
    """Row-stochastic pro-rata share matrix, with identity rows on sinks."""

    a: np.ndarray
    sinks: frozenset[int]
    total_out: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(self.a))
        object.__setattr__(self, "total_out", _frozen(self.total_out))
        object.__setattr__(self, "sinks", frozenset(int(i) for i in self.sinks))
        rows = self.a.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > ROW_SUM_TOL):
            i = int(np.argmax(np.abs(rows - 1.0)))
            raise NetworkError(f"relative liabilities row {i} sums to {rows[i]}, not 1")


def relative_liabilities(net: FinancialNetwork) -> RelativeLiabilities:
    """Normalize each debtor's row to its pro-rata shares.

    Sink nodes (zero total obligation) get a unit diagonal entry so the
    matrix stays row-stochastic.
    """
    p_bar = net.total_out
    a = np.zeros_like(net.liabilities)
    nonsink = p_bar > 0
    a[nonsink] = net.liabilities[nonsink] / p_bar[nonsink, None]
    sink_idx = np.flatnonzero(~nonsink)
    a[sink_idx, sink_idx] = 1.0
    return RelativeLiabilities(a=a, sinks=frozenset(int(i) for i in sink_idx), total_out=p_bar)


@dataclass(frozen=True)
class PaymentMatrix:
    """Entrywise actual payments, 0 <= P <= nominal liabilities."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.array(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise NetworkError(f"payment matrix must be square, got shape {p.shape}")
        bad = np.argwhere(p < 0)
        if bad.size:
            i, j = bad[0]
            raise NetworkError(f"payment[{i}, {j}] is negative ({p[i, j]})")
        if np.any(np.diagonal(p) != 0):
            i = int(np.argmax(np.diagonal(p) != 0))
            raise NetworkError(f"payment[{i}, {i}] must be zero")
        object.__setattr__(self, "entries", _frozen(p))

    @property
    def row_payments(self) -> np.ndarray:
        return self.entries.sum(axis=1)


def _check_bounds(net: FinancialNetwork, pm: PaymentMatrix, tol: float) -> None:
    if pm.entries.shape != net.liabilities.shape:
        raise NetworkError(
            f"payment matrix shape {pm.entries.shape} does not match "
            f"network shape {net.liabilities.shape}"
        )
    over = pm.entries - net.liabilities
    bad = np.argwhere(over > tol)
    if bad.size:
        i, j = bad[0]
        raise NetworkError(
            f"payment[{i}, {j}] = {pm.entries[i, j]} exceeds liability {net.liabilities[i, j]}"
        )


def flows(net: FinancialNetwork, pm: PaymentMatrix, tol: float = DEFAULT_TOL):
    """Actual in-flows (assets plus received payments) and out-flows."""
    _check_bounds(net, pm, tol)
    inflow = net.assets + pm.entries.sum(axis=0)
    outflow = pm.entries.sum(axis=1)
    return inflow, outflow


@dataclass(frozen=True)
class ResidualReport:
    """Per-node violation of the clearing equation, and a pass flag."""

    violations: np.ndarray
    max_violation: float
    ok: bool
    tol: float

    def __post_init__(self):
        object.__setattr__(self, "violations", _frozen(self.violations))


def clearing_matrix_residual(net: FinancialNetwork, pm: PaymentMatrix) -> np.ndarray:
    """Per-node |P 1 - min(p_bar, c + P^T 1)|."""
    inflow, outflow = flows(net, pm, tol=np.inf)
    return np.abs(outflow - np.minimum(net.total_out, inflow))


def check_clearing_matrix(
    net: FinancialNetwork, pm: PaymentMatrix, tol: float = DEFAULT_TOL
) -> ResidualReport:
    """Test whether a payment matrix settles the network.

    The matrix clears when every node either pays in full or pays exactly
    its in-flow, i.e. row sums equal min(p_bar, c + P^T 1).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    _check_bounds(net, pm, tol)
    viol = clearing_matrix_residual(net, pm)
    worst = float(viol.max()) if viol.size else 0.0
    return ResidualReport(violations=viol, max_violation=worst, ok=worst <= tol, tol=tol)


def clearing_vector_residual(net: FinancialNetwork, payments) -> np.ndarray:
    """Per-node |p - min(p_bar, c + A^T p)| under the pro-rata rule."""
    p = np.asarray(payments, dtype=float)
    a = relative_liabilities(net).a
    return np.abs(p - np.minimum(net.total_out, net.assets + a.T @ p))


def check_clearing_vector(
    net: FinancialNetwork, payments, tol: float = DEFAULT_TOL
) -> ResidualReport:
    """Vector counterpart of :func:`check_clearing_matrix`."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    viol = clearing_vector_residual(net, payments)
    worst = float(viol.max()) if viol.size else 0.0
    return ResidualReport(violations=viol, max_violation=worst, ok=worst <= tol, tol=tol)


def equities(net: FinancialNetwork, payments, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Net worth c + A^T p - p of each node under payments p.

    Raises :class:`NegativeEquityError` if any component falls below -tol,
    which signals that p is not a clearing vector.
    """
    p = np.asarray(payments, dtype=float)
    a = relative_liabilities(net).a
    zeta = net.assets + a.T @ p - p
    if np.any(zeta < -tol):
        i = int(np.argmin(zeta))
        raise NegativeEquityError(
            f"equity of node {i} is {zeta[i]} < -{tol}; payments are not clearing"
        )
    return zeta


@dataclass(frozen=True)
class ClearingSolution:
    """A clearing payment vector with residual diagnostics.

    ``defaults`` holds the nodes paying strictly less than their nominal
    obligation (p_i < p_bar_i - tol).
    """

    payments: np.ndarray
    residual: float
    equities: np.ndarray
    defaults: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "payments", _frozen(self.payments))
        object.__setattr__(self, "equities", _frozen(self.equities))
        object.__setattr__(self, "defaults", frozenset(int(i) for i in self.defaults))


def solution_from_payments(
    net: FinancialNetwork, payments, tol: float = DEFAULT_TOL, residual_tol: float = 1e-8
) -> ClearingSolution:
    """Package a payment vector into a validated :class:`ClearingSolution`."""
    p = np.asarray(payments, dtype=float)
    report = check_clearing_vector(net, p, tol=residual_tol)
    if not report.ok:
        raise NetworkError(
            f"payments violate the clearing equation by {report.max_violation} > {residual_tol}"
        )
    zeta = equities(net, p, tol=residual_tol)
    defaults = frozenset(int(i) for i in np.flatnonzero(p < net.total_out - tol))
    return ClearingSolution(
        payments=p,
        residual=report.max_violation,
        equities=np.maximum(zeta, 0.0),
        defaults=defaults,
    )


def default_set(net: FinancialNetwork, payments, tol: float = DEFAULT_TOL) -> frozenset[int]:
    """Nodes paying strictly less than their nominal total obligation."""
    p = np.asarray(payments, dtype=float)
    return frozenset(int(i) for i in np.flatnonzero(p < net.total_out - tol))


# ---------------------------------------------------------------------------
# JSON network files: {"n": int, "liabilities": [[i, j, amount], ...],
# "nominal_assets": [...], "assets": [...]}. Sparse edge list; missing edges
# are zero; "assets" is optional and defaults to nominal_assets.
# ---------------------------------------------------------------------------


def network_from_dict(data: dict) -> FinancialNetwork:
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError):
        raise NetworkError('missing or invalid "n" field')
    if n < 1:
        raise NetworkError(f'"n" must be >= 1, got {n}')
    liab = np.zeros((n, n))
    for idx, edge in enumerate(data.get("liabilities", [])):
        try:
            i, j, amount = edge
            i, j, amount = int(i), int(j), float(amount)
        except (TypeError, ValueError):
            raise NetworkError(f"liability entry #{idx} is malformed: {edge!r}")
        if not (0 <= i < n and 0 <= j < n):
            raise NetworkError(f"liability entry #{idx} has out-of-range nodes ({i}, {j})")
        if i == j:
            raise NetworkError(f"liability entry #{idx} is a self-claim on node {i}")
        if amount < 0:
            raise NetworkError(f"liability entry #{idx} ({i} -> {j}) is negative ({amount})")
        liab[i, j] += amount
    if "nominal_assets" not in data:
        raise NetworkError('missing "nominal_assets" field')
    nominal = data["nominal_assets"]
    assets = data.get("assets")
    return FinancialNetwork(liab, nominal, assets)


def network_to_dict(net: FinancialNetwork) -> dict:
    edges = [
        [int(i), int(j), float(net.liabilities[i, j])]
        for i, j in np.argwhere(net.liabilities > 0)
    ]
    data = {
        "n": net.n,
        "liabilities": edges,
        "nominal_assets": [float(v) for v in net.nominal_assets],
    }
    if not np.array_equal(net.assets, net.nominal_assets):
        data["assets"] = [float(v) for v in net.assets]
    return data


def load_network(path) -> FinancialNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise NetworkError("network file must contain a JSON object")
    return network_from_dict(data)


def save_network(net: FinancialNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=2)
        fh.write("\n")
