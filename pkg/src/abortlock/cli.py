"""Command-line entry point: simulate, explore, replay and stress.

Exit codes: 0 pass, 1 violation (or an incomplete search), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .explore import CHECKS, ScheduleParams, explore, run
from .native import stress
from .traceio import amortized_from_trace, read_trace, write_report, write_trace
from .verifiers import TraceError, analyze_trace

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _checks(value: str) -> frozenset[str]:
    names = {v.strip() for v in value.split(",") if v.strip()}
    if "all" in names:
        return CHECKS
    if names == {"none"}:
        return frozenset()
    unknown = names - CHECKS
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown check(s): {', '.join(sorted(unknown))}")
    return frozenset(names)


def _rate(value: str) -> float:
    try:
        r = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 <= r <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return r


def _positive(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abortlock", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one seeded schedule with online checks")
    sim.add_argument("--procs", type=_positive, default=2)
    sim.add_argument("--steps", type=_positive, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--abort-rate", type=_rate, default=0.0)
    sim.add_argument("--scheduler", choices=("random", "round-robin"), default="random")
    sim.add_argument("--attempts", type=_positive, default=None, help="attempt budget per process")
    sim.add_argument("--fairness", choices=("weak", "none"), default="weak")
    sim.add_argument("--late-joiners", type=int, default=0)
    sim.add_argument("--check", type=_checks, default=CHECKS, help="comma list, 'all' or 'none'")
    sim.add_argument("--trace", help="write the JSON-lines trace here")
    sim.add_argument("--report", help="write the JSON report here")

    exp = sub.add_parser("explore", help="exhaustive search under attempt budgets")
    exp.add_argument("--procs", type=_positive, default=2)
    exp.add_argument("--attempts", type=_positive, default=1)
    exp.add_argument("--aborts", choices=("none", "nondet"), default="none")
    exp.add_argument("--max-states", type=_positive, default=5_000_000)
    exp.add_argument("--check", type=_checks, default=CHECKS)
    exp.add_argument("--report")

    rep = sub.add_parser("replay", help="re-check a stored trace offline")
    rep.add_argument("--trace", required=True)
    rep.add_argument("--check", type=_checks, default=CHECKS)
    rep.add_argument("--fair", action="store_true", help="also flag unsignalled attempts that never enter")
    rep.add_argument("--report")

    st = sub.add_parser("stress", help="hammer the native lock from real threads")
    st.add_argument("--threads", type=_positive, default=8)
    st.add_argument("--iters", type=int, default=10_000)
    st.add_argument("--abort-prob", type=_rate, default=0.0)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--timeout", type=float, default=120.0)
    st.add_argument("--report")
    return parser


def _emit(report: dict, path: str | None) -> None:
    if path:
        write_report(path, report)
    summary = {k: report[k] for k in ("status", "totals") if k in report}
    if report.get("violations"):
        summary["first_violation"] = report["violations"][0]
    print(json.dumps(summary, sort_keys=True))


def _exit_code(status: str) -> int:
    return EXIT_PASS if status == "pass" else EXIT_FAIL


def cmd_simulate(args) -> int:
    params = ScheduleParams(
        procs=args.procs,
        scheduler=args.scheduler,
        seed=args.seed,
        max_steps=args.steps,
        abort_rate=args.abort_rate,
        attempts_per_proc=args.attempts,
        fairness=args.fairness,
        checks=args.check,
        late_joiners=args.late_joiners,
    )
    trace, report = run(params)
    if args.trace:
        write_trace(args.trace, trace)
    out = report.to_dict(params)
    _emit(out, args.report)
    return _exit_code(out["status"])


def cmd_explore(args) -> int:
    params = ScheduleParams(
        procs=args.procs,
        scheduler="exhaustive",
        attempts_per_proc=args.attempts,
        abort_rate=args.aborts,
        checks=args.check,
        max_states=args.max_states,
    )
    report = explore(params)
    out = report.to_dict(params)
    _emit(out, args.report)
    return _exit_code(out["status"])


def cmd_replay(args) -> int:
    lines = list(read_trace(args.trace))
    violations = []
    totals = {"steps": len(lines)}
    if "trace" in args.check or "invariant" in args.check:
        tr = analyze_trace(lines, fair=args.fair)
        violations += tr.violations
        totals.update(attempts=tr.attempts, cs_entries=tr.cs_entries, aborts=tr.aborts)
    if "amortized" in args.check:
        violations += amortized_from_trace(lines)
    totals["rmr_cc"] = sum(rec["rmr_cc"] for rec in lines)
    totals["rmr_dsm"] = sum(rec["rmr_dsm"] for rec in lines)
    violations.sort(key=lambda v: v.step_seq if v.step_seq is not None else -1)
    out = {
        "params": {"trace": args.trace, "checks": sorted(args.check), "fair": args.fair},
        "totals": totals,
        "violations": [v.to_dict() for v in violations],
        "status": "fail" if violations else "pass",
    }
    _emit(out, args.report)
    return _exit_code(out["status"])


def cmd_stress(args) -> int:
    if args.iters < 0:
        raise ValueError("--iters must be non-negative")
    report = stress(args.threads, args.iters, args.abort_prob, args.seed, timeout=args.timeout)
    out = {
        "params": {
            "threads": args.threads,
            "iterations": args.iters,
            "abort_probability": args.abort_prob,
            "seed": args.seed,
        },
        **report.to_dict(),
    }
    if args.report:
        write_report(args.report, out)
    print(json.dumps(out, sort_keys=True))
    return _exit_code(out["status"])


COMMANDS = {
    "simulate": cmd_simulate,
    "explore": cmd_explore,
    "replay": cmd_replay,
    "stress": cmd_stress,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (TraceError, ValueError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
