"""Command-line interface.

Subcommands: gen, clear-vector, clear-matrix, uniqueness, clearing-set,
experiment, validate. JSON in and out everywhere except the experiment
CSV. Exit codes: 0 success, 1 user error (bad files or flags), 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .clearing_matrix import optimal_matrix_lp, prorata_matrix, system_loss
from .clearing_set import resolve_clearing_set, sample_clearing_vectors, \
    sink_component_uniqueness, sufficient_uniqueness
from .clearing_vector import dominant_vector_fda, dominant_vector_lp
from .experiment import run_sweep, sweep_metadata, write_csv, write_metadata
from .lp import LpError
from .model import (
    DEFAULT_TOL,
    NetworkError,
    check_clearing_matrix,
    check_clearing_vector,
    equities,
    default_set,
    load_network,
    network_to_dict,
    save_network,
)
from .simgen import GeneratorConfig, generate


class CliError(Exception):
    """User error: bad flags or input files."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise CliError(message)


def _env_seed() -> int:
    raw = os.environ.get("CLEARNET_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"CLEARNET_SEED must be an integer, got {raw!r}")


def _parse_grid(spec: str) -> list[float]:
    """Grid values: 'a:b:step' (inclusive), 'a:b' (step 1), or 'a,b,c'."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) == 2:
            start, stop, step = float(parts[0]), float(parts[1]), 1.0
        elif len(parts) == 3:
            start, stop, step = float(parts[0]), float(parts[1]), float(parts[2])
        else:
            raise CliError(f"bad range {spec!r}; expected start:stop[:step]")
        if step <= 0:
            raise CliError(f"range step must be positive in {spec!r}")
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(v)
            v += step
        return values
    return [float(v) for v in spec.split(",") if v.strip()]


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str):
    try:
        return load_network(path)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}")
    except NetworkError as exc:
        raise CliError(f"{path}: {exc}")


def _matrix_triples(entries: np.ndarray) -> list[list[float]]:
    return [
        [int(i), int(j), float(entries[i, j])] for i, j in np.argwhere(entries > 0)
    ]


def build_parser() -> _Parser:
    parser = _Parser(prog="clearnet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"clearnet {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("gen", help="generate a random network", parents=[])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degree", type=float, required=True, help="average node degree")
    p.add_argument("--pmax", type=float, default=100.0, help="max single liability")
    p.add_argument("--beta", type=float, default=0.05, help="external-asset share")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", default=None)

    for name in ("clear-vector", "clear-matrix", "uniqueness", "clearing-set", "validate"):
        p = sub.add_parser(name)
        p.add_argument("network", help="network JSON file")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("-o", "--output", default=None)
        if name == "clear-matrix":
            p.add_argument("--prorata", action="store_true", help="spread the dominant vector pro-rata")
        if name == "clearing-set":
            p.add_argument("--samples", type=int, default=5)
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("experiment", help="Monte-Carlo sweep over (degree, shock size)")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--degrees", default="5:35:5")
    p.add_argument("--shocks", default="1:5")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--pmax", type=float, default=100.0)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    return parser


def _cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    try:
        cfg = GeneratorConfig(
            n=args.n, avg_degree=args.degree, p_max=args.pmax, beta=args.beta, seed=seed
        )
    except ValueError as exc:
        raise CliError(str(exc))
    net = generate(cfg)
    if args.output is None or args.output == "-":
        sys.stdout.write(json.dumps(network_to_dict(net), indent=2) + "\n")
    else:
        save_network(net, args.output)
    return 0


def _cmd_clear_vector(args) -> int:
    net = _load(args.network)
    lp_result = dominant_vector_lp(net)
    fda_result = dominant_vector_fda(net)
    agreement = float(np.abs(lp_result.p_star - fda_result.p_star).max(initial=0.0))
    report = check_clearing_vector(net, lp_result.p_star, tol=max(args.tol, 1e-8))
    _emit(
        {
            "p_star": [float(v) for v in lp_result.p_star],
            "equities": [float(v) for v in equities(net, lp_result.p_star, tol=1e-6)],
            "defaults": sorted(default_set(net, lp_result.p_star, tol=args.tol)),
            "method_agreement": agreement,
            "fda_converged": fda_result.converged,
            "fda_iterations": fda_result.iterations,
            "residual": report.max_violation,
        },
        args.output,
    )
    return 0


def _cmd_clear_matrix(args) -> int:
    net = _load(args.network)
    if args.prorata:
        pm = prorata_matrix(net, dominant_vector_lp(net).p_star)
        kind = "prorata"
    else:
        pm = optimal_matrix_lp(net)
        kind = "optimal"
    report = check_clearing_matrix(net, pm, tol=max(args.tol, 1e-8))
    _emit(
        {
            "kind": kind,
            "matrix": _matrix_triples(pm.entries),
            "total_payments": float(pm.entries.sum()),
            "system_loss": system_loss(net, pm),
            "residual": report.max_violation,
        },
        args.output,
    )
    return 0


def _cmd_uniqueness(args) -> int:
    net = _load(args.network)
    reach_unique, _fixed_seed = sufficient_uniqueness(net)
    sink_unique = sink_component_uniqueness(net)
    cs, trace = resolve_clearing_set(net, tol=args.tol)
    _emit(
        {
            "unique": cs.is_unique,
            "criterion_reachability": reach_unique,
            "criterion_sink_components": sink_unique,
            "fixed_nodes": sorted(cs.fixed_nodes),
            "free_nodes": list(cs.free_nodes),
            "stage_trace": [
                {
                    "stage": r.stage,
                    "active": sorted(r.active),
                    "inflow_support": sorted(r.inflow_support),
                    "sources": sorted(r.sources),
                    "closure": sorted(r.closure),
                }
                for r in trace
            ],
        },
        args.output,
    )
    return 0


def _cmd_clearing_set(args) -> int:
    net = _load(args.network)
    seed = args.seed if args.seed is not None else _env_seed()
    cs, _ = resolve_clearing_set(net, tol=args.tol)
    samples = sample_clearing_vectors(cs, count=args.samples, seed=seed)
    eq = [equities(net, p, tol=1e-6) for p in samples]
    spread = float(np.max([np.abs(e - eq[0]).max(initial=0.0) for e in eq])) if eq else 0.0
    _emit(
        {
            "unique": cs.is_unique,
            "p_star": [float(v) for v in cs.p_star],
            "fixed_nodes": sorted(cs.fixed_nodes),
            "free_nodes": list(cs.free_nodes),
            "free_bounds": [float(v) for v in cs.free_bounds],
            "samples": [[float(v) for v in p] for p in samples],
            "equity_spread": spread,
        },
        args.output,
    )
    return 0


def _cmd_validate(args) -> int:
    net = _load(args.network)
    sys.stdout.write(
        json.dumps(
            {
                "ok": True,
                "n": net.n,
                "arcs": int((net.liabilities > 0).sum()),
                "total_liabilities": float(net.liabilities.sum()),
                "total_assets": float(net.assets.sum()),
                "shocked": bool(np.any(net.assets < net.nominal_assets)),
            },
            indent=2,
        )
        + "\n"
    )
    return 0


def _cmd_experiment(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    d_values = _parse_grid(args.degrees)
    ns_values = [int(v) for v in _parse_grid(args.shocks)]
    if args.trials < 1:
        raise CliError("--trials must be >= 1")
    if args.jobs < 1:
        raise CliError("--jobs must be >= 1")
    summaries = run_sweep(
        d_values,
        ns_values,
        trials=args.trials,
        base_seed=seed,
        n=args.n,
        p_max=args.pmax,
        beta=args.beta,
        jobs=args.jobs,
    )
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        write_csv(summaries, fh)
    meta = sweep_metadata(d_values, ns_values, args.trials, seed, args.n, args.pmax, args.beta)
    meta_path = os.path.splitext(args.output)[0] + ".meta.json"
    with open(meta_path, "w", encoding="utf-8") as fh:
        write_metadata(meta, fh)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "clear-vector": _cmd_clear_vector,
    "clear-matrix": _cmd_clear_matrix,
    "uniqueness": _cmd_uniqueness,
    "clearing-set": _cmd_clearing_set,
    "validate": _cmd_validate,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"clearnet: error: {exc}\n")
        return 1
    except (NetworkError, ValueError) as exc:
        sys.stderr.write(f"clearnet: error: {exc}\n")
        return 1
    except LpError as exc:
        sys.stderr.write(f"clearnet: numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
