"""Command-line front end.

Exit codes: 0 success, 1 a verification or decode check failed, 2 bad usage
or an instance outside an operation's preconditions.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from fractions import Fraction
from typing import Sequence

from codedcache import __version__, kernels
from codedcache.combinatorics import (
    all_demands,
    as_rational,
    format_rational,
    perm_count,
    permutations_of,
)
from codedcache.converse import (
    MAX_INEQUALITIES,
    ConverseError,
    aggregate_coefficients,
    brute_force_aggregate,
    lower_bound,
    lp_oracle,
    residual_check,
    verify_optimality,
)
from codedcache.indexcoding import (
    build_graph,
    export_graph,
    permutation_set,
    permutation_suite,
    man_split,
    uniform_split,
)
from codedcache.schemes import (
    ProblemInstance,
    SchemeError,
    check_demands,
    coded_small_cache_scheme,
    cut_set_bound,
    decode_all,
    large_cache_optimality_check,
    man_delivery,
    man_load,
    man_placement,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TRADEOFF_COLUMNS = ["M", "man_load", "cut_set", "lower_bound", "lp_oracle"]


class UsageError(Exception):
    pass


def _r(v) -> str | None:
    return None if v is None else format_rational(v)


def _dec(v) -> str:
    return "" if v is None else f"{float(v):.10g}"


def _parse_list(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers, got {text!r}")


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# -- tradeoff ---------------------------------------------------------------

def tradeoff_rows(N: int, K: int, grid: int = 2, M=None) -> list[dict]:
    if grid < 1:
        raise UsageError("--grid must be a positive integer")
    points = [as_rational(M)] if M is not None else [Fraction(j * N, grid * K) for j in range(grid * K + 1)]
    rows = []
    for m in points:
        if not 0 <= m <= N:
            raise UsageError(f"M={m} outside [0, {N}]")
        converse = N >= K
        rows.append({
            "M": m,
            "man_load": man_load(N, K, m, allow_fewer_files=True),
            "cut_set": cut_set_bound(N, K, m),
            "lower_bound": lower_bound(N, K, m) if converse else None,
            "lp_oracle": lp_oracle(N, K, m) if converse else None,
        })
    return rows


def render_tradeoff(N: int, K: int, rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRADEOFF_COLUMNS + [f"{c}_decimal" for c in TRADEOFF_COLUMNS])
        for row in rows:
            w.writerow([_r(row[c]) or "" for c in TRADEOFF_COLUMNS]
                       + [_dec(row[c]) for c in TRADEOFF_COLUMNS])
        return buf.getvalue()
    payload = {
        "command": "tradeoff",
        "N": N,
        "K": K,
        "columns": TRADEOFF_COLUMNS,
        "rows": [{**{c: _r(row[c]) for c in TRADEOFF_COLUMNS},
                  "decimal": {c: (None if row[c] is None else float(row[c])) for c in TRADEOFF_COLUMNS}}
                 for row in rows],
    }
    return _dump_json(payload)


def cmd_tradeoff(args) -> int:
    rows = tradeoff_rows(args.n, args.k, args.grid, args.m)
    _emit(render_tradeoff(args.n, args.k, rows, args.format), args.out)
    return EXIT_OK


# -- verify -----------------------------------------------------------------

def verify_report(N: int, K: int) -> dict:
    if N < K:
        raise ConverseError("N<K unsupported for converse")
    checks = []
    started = time.perf_counter()

    rep = verify_optimality(N, K)
    checks.append({
        "name": "optimality_grid",
        "passed": rep.ok,
        "details": {
            "rows": [{"M": _r(r.M), "lower_bound": _r(r.lower_bound), "lp_oracle": _r(r.lp_oracle),
                      "man_load": _r(r.man_load), "q": r.q, "passed": r.ok} for r in rep.rows],
            "converse_corners": [[_r(m), _r(v)] for m, v in rep.converse_curve.corners],
            "achievable_corners": [[_r(m), _r(v)] for m, v in rep.achievable_curve.corners],
        },
    })

    pairs = perm_count(N, K) * perm_count(K, K)
    if pairs <= MAX_INEQUALITIES:
        suite = permutation_suite(N, K)
        checks.append({
            "name": "permutation_sets_acyclic",
            "passed": suite.ok,
            "details": {"pairs": suite.pairs,
                        "acyclic_failures": [[list(d), list(u)] for d, u in suite.acyclic_failures],
                        "level_failures": [[list(d), list(u)] for d, u in suite.level_failures]},
        })
        brute = brute_force_aggregate(N, K)
        closed = aggregate_coefficients(N, K)
        checks.append({
            "name": "aggregate_coefficients",
            "passed": brute == closed,
            "details": {"inequalities": pairs, "enumerated": [_r(c) for c in brute],
                        "closed_form": [_r(c) for c in closed]},
        })
    else:
        checks.append({"name": "permutation_sets_acyclic", "passed": True,
                       "details": {"skipped": f"{pairs} pairs exceed {MAX_INEQUALITIES}"}})

    large = large_cache_optimality_check(N, K)
    checks.append({
        "name": "large_cache_optimality",
        "passed": large.ok,
        "details": {"points": [{"M": _r(p.M), "man_load": _r(p.man_load), "cut_set": _r(p.cut_set),
                                "expected": _r(p.expected)} for p in large.points]},
    })

    residuals = residual_check(N, K)
    checks.append({
        "name": "elimination_residuals",
        "passed": all(r.ok for r in residuals),
        "details": {"failures": [{"q": r.q, "i": r.i, "eliminated": _r(r.eliminated),
                                  "closed_form": _r(r.closed_form), "chained": _r(r.chained)}
                                 for r in residuals if not r.ok],
                    "checked": len(residuals)},
    })

    return {
        "command": "verify",
        "N": N,
        "K": K,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "seconds": round(time.perf_counter() - started, 3),
    }


def cmd_verify(args) -> int:
    report = verify_report(args.n, args.k)
    if not args.timing:
        report.pop("seconds")
    _emit(_dump_json(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# -- simulate ---------------------------------------------------------------

def _demand_list(args, N: int, K: int) -> list[tuple[int, ...]]:
    chosen = [args.demands is not None, args.all_demands, args.random_demands is not None]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --demands, --all-demands, --random-demands")
    if args.demands is not None:
        return [check_demands(_parse_list(args.demands, "--demands"), N, K)]
    if args.all_demands:
        return list(all_demands(N, K))
    rng = random.Random(args.seed)
    return [tuple(rng.randint(1, N) for _ in range(K)) for _ in range(args.random_demands)]


def simulate_report(scheme: str, N: int, K: int, demands: Sequence[tuple[int, ...]],
                    t: int | None = None, subfile_bits: int = 8, seed: int = 0) -> dict:
    runs = []
    if scheme == "man":
        if t is None:
            raise UsageError("--t is required for the man scheme")
        inst = ProblemInstance.for_t(N, K, t, subfile_bits)
        placement = man_placement(inst, t, seed=seed)
    elif scheme == "coded-small":
        inst = ProblemInstance(N, K, Fraction(1, K), subfile_bits)
        placement = None
    else:
        raise UsageError(f"unknown scheme {scheme!r}")
    for d in demands:
        if scheme == "man":
            p, sched = placement, man_delivery(placement, d)
        else:
            p, sched = coded_small_cache_scheme(inst, d, seed=seed)
        verdict = decode_all(p, d, sched)
        runs.append({
            "demands": list(d),
            "load": _r(sched.load),
            "transmissions": len(sched),
            "decoded": verdict.ok,
            "users": [{"user": v.user, "demand": v.demand, "decoded": v.ok,
                       "missing": [list(sid) for sid in v.missing]} for v in verdict.verdicts],
        })
    return {
        "command": "simulate",
        "scheme": scheme,
        "N": N,
        "K": K,
        "M": _r(inst.M),
        "t": t,
        "file_bits": p.file_bits,
        "worst_load": _r(max(Fraction(r["load"]) for r in runs)),
        "all_decoded": all(r["decoded"] for r in runs),
        "runs": runs,
    }


def render_simulation(report: dict) -> str:
    head = f"scheme={report['scheme']} N={report['N']} K={report['K']} M={report['M']}"
    if report["t"] is not None:
        head += f" t={report['t']}"
    lines = [head]
    for run in report["runs"]:
        users = " ".join(f"u{u['user']}:{'ok' if u['decoded'] else 'FAIL'}" for u in run["users"])
        lines.append(f"d={','.join(map(str, run['demands']))} load={run['load']} "
                     f"transmissions={run['transmissions']} {users}")
    lines.append(f"worst_load={report['worst_load']} all_decoded={str(report['all_decoded']).lower()}")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    demands = _demand_list(args, args.n, args.k)
    report = simulate_report(args.scheme, args.n, args.k, demands, args.t, args.subfile_bits, args.seed)
    text = _dump_json(report) if args.format == "json" else render_simulation(report)
    _emit(text, args.out)
    return EXIT_OK if report["all_decoded"] else EXIT_FAIL


# -- graph ------------------------------------------------------------------

def cmd_graph(args) -> int:
    N, K = args.n, args.k
    if N < K:
        raise ConverseError("N<K unsupported for converse")
    d = check_demands(_parse_list(args.demands, "--demands"), N, K, distinct=True)
    if args.split == "uniform":
        split = uniform_split(N, K)
    else:
        if args.t is None:
            raise UsageError("--t is required with --split man")
        split = man_split(N, K, args.t)
    g = build_graph(split, d, N)
    if args.perm:
        perms = [_parse_list(p, "--perm") for p in args.perm]
    elif args.permutation_sets:
        perms = permutations_of(K)
    else:
        perms = []
    sets = [(u, permutation_set(d, u)) for u in perms]
    _emit(export_graph(g, sets), args.out)
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codedcache",
        description="Coded caching loads, bounds and exact converse verification.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} (kernels: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    def nk(p):
        p.add_argument("--n", type=int, required=True, help="number of files N")
        p.add_argument("--k", type=int, required=True, help="number of users K")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("tradeoff", help="tabulate achievable load and bounds over an M grid")
    nk(p)
    p.add_argument("--grid", type=int, default=2, help="points per N/K step (default 2)")
    p.add_argument("--m", type=as_rational, default=None, help="single memory value, e.g. 2/3")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("verify", help="exact optimality checks for N >= K")
    nk(p)
    p.add_argument("--timing", action="store_true", help="include wall-clock seconds in the report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="bit-exact placement, delivery and decoding")
    nk(p)
    p.add_argument("--scheme", choices=["man", "coded-small"], required=True)
    p.add_argument("--t", type=int, default=None, help="caching parameter for the man scheme")
    p.add_argument("--demands", default=None, help="demand vector, e.g. 1,2,3")
    p.add_argument("--all-demands", action="store_true", help="every demand vector in [1:N]^K")
    p.add_argument("--random-demands", type=int, default=None, metavar="R",
                   help="R demand vectors drawn with --seed")
    p.add_argument("--seed", type=int, default=0, help="seed for demand sampling and file contents")
    p.add_argument("--subfile-bits", type=int, default=8)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("graph", help="export the side-information graph")
    nk(p)
    p.add_argument("--demands", required=True, help="distinct demand vector, e.g. 1,2,3")
    p.add_argument("--split", choices=["uniform", "man"], default="uniform")
    p.add_argument("--t", type=int, default=None, help="caching parameter for --split man")
    p.add_argument("--permutation-sets", action="store_true", help="append every permutation set")
    p.add_argument("--perm", action="append", default=None, help="append the set for one permutation")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SchemeError, ConverseError, ValueError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
