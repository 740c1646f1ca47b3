"""Command-line interface: generate, verify, solve, bench.

JSON results go to stdout, human summaries to stderr.  Exit codes: 0 success
or stable, 1 verified unstable, 2 usage or input error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from corestable import generators
from corestable.errors import (
    ConvergenceError,
    CoreStableError,
    InfeasibleCommitteeError,
    InstanceTooLargeError,
    InvalidCommitteeError,
    InvalidInstanceError,
    InvalidLotteryError,
)
from corestable.lottery import exact_game, mwu_solve
from corestable.model import Lottery, as_committee, committee_weight, load_instance
from corestable.rounding import MWUProvider, RoundingParams, analysis_bound, iterated_rounding
from corestable.smallk import verify_exact_small_k
from corestable.stability import MAX_ALL_COMMITTEES_M, min_deterministic_c, verify_committee, verify_lottery

EXIT_OK, EXIT_UNSTABLE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _default_bound(inst, L):
    """Verify against every committee when affordable, else up to L members."""
    return None if L is None and inst.m <= MAX_ALL_COMMITTEES_M else (L or 1)


# -- generate ---------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.family == "cyclic":
        inst = generators.gen_cyclic(args.m, args.eps)
    elif args.family == "grid":
        inst = generators.gen_ranking_grid(args.r, args.ell)
    else:
        inst = generators.gen_random(
            args.kind, args.m, args.n, args.K, args.density, args.seed, args.resources
        )
    text = inst.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _note(f"wrote {args.family} instance (m={inst.m}, n={inst.n}, K={inst.K:g}) to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- verify -----------------------------------------------------------------


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    if (args.committee is None) == (args.lottery is None):
        raise UsageError("give exactly one of --committee or --lottery")
    if args.committee is not None:
        members = [int(x) for x in args.committee.split(",") if x.strip()]
        report = verify_committee(inst, as_committee(members, inst.m), args.c, args.L)
    else:
        with open(args.lottery) as fh:
            lottery = Lottery.from_dict(json.load(fh))
        report = verify_lottery(inst, lottery, args.c, args.L)
    _emit(report.to_dict())
    _note(f"{'stable' if report.stable else 'NOT stable'} at c={args.c:g}; worst ratio {report.worst_ratio:.6g}")
    return EXIT_OK if report.stable else EXIT_UNSTABLE


# -- solve ------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.mode == "lottery":
        result = mwu_solve(inst, L=args.L, eps=args.eps, seed=args.seed)
        report = verify_lottery(inst, result.lottery, 2 + args.eps, args.L)
        out = {
            "mode": "lottery",
            "lottery": result.lottery.to_dict(),
            "c": 2 + args.eps,
            "L": args.L,
            "worst_ratio": report.worst_ratio,
            "stable": report.stable,
            "rounds": result.rounds,
        }
    elif args.mode == "committee":
        params = RoundingParams(args.alpha, args.beta, args.eps, args.seed)
        provider = MWUProvider(inst, L=args.L, eps=args.eps, seed=args.seed)
        T, trace = iterated_rounding(inst, params, provider)
        if args.trace:
            with open(args.trace, "w") as fh:
                fh.write(trace.to_jsonl())
        bound = trace.theoretical_bound
        L = _default_bound(inst, None)
        report = verify_committee(inst, T, bound, L)
        out = {
            "mode": "committee",
            "committee": list(T),
            "weight": committee_weight(inst, T),
            "theoretical_bound": bound,
            "worst_ratio": report.worst_ratio,
            "worst_blocker": None if report.worst_blocker is None else list(report.worst_blocker),
            "stable": report.stable,
            "bound": "all" if L is None else {"L": L},
            "rounds": len(trace.rounds),
        }
    else:
        sol = exact_game(inst, args.c, attacker_L=args.L_attacker)
        report = verify_lottery(inst, sol.defender_lottery, args.c, args.L_attacker)
        out = {"mode": "exact-game", **sol.to_dict(), "worst_ratio": report.worst_ratio, "stable": report.stable}
    _emit(out)
    _note(f"{args.mode}: worst ratio {out['worst_ratio']:.6g}, stable={out['stable']}")
    return EXIT_OK if out["stable"] else EXIT_UNSTABLE


# -- bench ------------------------------------------------------------------


def _bench_lowerbounds(seeds):
    rows = []
    eps = 0.2
    for m in (5, 10, 20):
        inst = generators.gen_cyclic(m, eps)
        # blockers of size >= 2 have ratio <= K/2 < 1, so size 2 suffices beyond m = 10
        L = None if m <= 10 else 2
        measured, _ = min_deterministic_c(inst, L)
        formula = (m - 1) / m * (2 - eps / 2)
        rows.append(
            {"family": "cyclic", "m": m, "r": "", "ell": "", "eps": eps, "bound": "all" if L is None else L,
             "formula": formula, "measured": measured, "ok": abs(measured - formula) <= 1e-9}
        )
    for r in (3, 4, 5):
        for ell in (3, 4, 5):
            inst = generators.gen_ranking_grid(r, ell)
            measured, _ = min_deterministic_c(inst, 1)
            formula = (2 * ell - 1) * (r - 1) / (ell * r)
            rows.append(
                {"family": "grid", "m": r * ell, "r": r, "ell": ell, "eps": "", "bound": 1,
                 "formula": formula, "measured": measured, "ok": measured >= formula - 1e-9}
            )
    return rows


def _bench_smallk(seeds):
    rows = []
    for K in (1, 2, 3):
        for kind in ("approval", "ranking"):
            for seed in range(seeds):
                inst = generators.gen_random(kind, 6, 6, K, seed=1000 * K + seed)
                try:
                    sol = verify_exact_small_k(inst)
                    value, ok = sol.value, True
                except AssertionError:
                    value, ok = float("nan"), False
                rows.append({"K": K, "kind": kind, "seed": seed, "value": value, "ok": ok})
    return rows


def _bench_rounding(seeds):
    rows = []
    for kind in generators.KINDS:
        for seed in range(seeds):
            inst = generators.gen_random(kind, 8, 10, 3, seed=seed)
            T, _ = iterated_rounding(inst, RoundingParams(seed=seed))
            report = verify_committee(inst, T, 32.0)
            rows.append(
                {"kind": kind, "seed": seed, "m": inst.m, "n": inst.n, "K": inst.K,
                 "committee": " ".join(map(str, T)), "weight": committee_weight(inst, T),
                 "worst_ratio": report.worst_ratio, "theoretical": analysis_bound(0.5, 0.25),
                 "ok": report.stable}
            )
    return rows


SUITES = {"lowerbounds": _bench_lowerbounds, "smallk": _bench_smallk, "rounding": _bench_rounding}


def cmd_bench(args) -> int:
    rows = SUITES[args.suite](args.seeds)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    failed = sum(not r["ok"] for r in rows)
    _note(f"{args.suite}: {len(rows)} rows, {failed} not ok")
    return EXIT_OK


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corestable", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an instance JSON file")
    g.add_argument("--family", required=True, choices=["cyclic", "grid", "random"])
    g.add_argument("--m", type=int, default=10)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--K", type=float, default=3.0)
    g.add_argument("--eps", type=float, default=0.2)
    g.add_argument("--r", type=int, default=4)
    g.add_argument("--ell", type=int, default=4)
    g.add_argument("--kind", choices=generators.KINDS, default="approval")
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--resources", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check a committee or lottery for c-stability")
    v.add_argument("--instance", required=True)
    v.add_argument("--committee")
    v.add_argument("--lottery")
    v.add_argument("--c", type=float, default=1.0)
    v.add_argument("--L", type=int, default=None, help="blocker size bound (default: all committees)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="compute a stable lottery or committee")
    s.add_argument("--instance", required=True)
    s.add_argument("--mode", choices=["lottery", "committee", "exact-game"], default="committee")
    s.add_argument("--L", type=int, default=1)
    s.add_argument("--L-attacker", dest="L_attacker", type=int, default=None)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--beta", type=float, default=0.25)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", help="write the rounding trace as JSON lines to this file")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="reproduce bound tables as CSV")
    b.add_argument("--suite", required=True, choices=sorted(SUITES))
    b.add_argument("--seeds", type=int, default=5)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, InvalidInstanceError, InvalidLotteryError,
            InvalidCommitteeError, InfeasibleCommitteeError, OSError, json.JSONDecodeError) as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT
    except (ConvergenceError, InstanceTooLargeError, CoreStableError, RuntimeError) as exc:
        _note(f"solver failure: {exc}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
