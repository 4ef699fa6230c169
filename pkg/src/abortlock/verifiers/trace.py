"""Offline analysis of a complete step trace.

Works on anything shaped like a trace line: a :class:`StepRecord` or the
dict form written to JSON-lines trace files. Only ``seq``, ``actor``,
``kind``, ``pre_pc``, ``post_pc`` and ``events`` are consulted, so a stored
trace can be re-checked without the configurations that produced it.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Iterable

from .invariant import Violation

FAST_ABORT_BOUND = 6
EXIT_BOUND = 2
TRY_PCS = frozenset({2, 3, 4, 5, 6})
CHECKS = ("mutex", "afcfs", "fast_abort", "exit_bound", "starvation")


class TraceError(ValueError):
    """The trace is not a well-formed run (events out of order, gaps)."""


@dataclass
class Attempt:
    pid: str
    start: int
    doorway: int | None = None
    cs_enter: int | None = None
    end: int | None = None
    success: bool | None = None
    signal: int | None = None


@dataclass
class Passage:
    pid: str
    attempts: list[Attempt]

    @property
    def start(self) -> int:
        return self.attempts[0].start

    @property
    def doorway(self) -> int | None:
        return self.attempts[-1].doorway

    @property
    def cs_enter(self) -> int | None:
        return self.attempts[-1].cs_enter


@dataclass
class TraceReport:
    violations: list[Violation] = field(default_factory=list)
    attempts: int = 0
    cs_entries: int = 0
    aborts: int = 0
    max_abort_steps: int = 0
    max_exit_steps: int = 0
    steps: int = 0

    def status(self, check: str) -> str:
        return "fail" if any(v.clause == check for v in self.violations) else "pass"

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> dict[str, str]:
        return {check: self.status(check) for check in CHECKS}


def _get(rec: Any, name: str):
    return rec[name] if isinstance(rec, dict) else getattr(rec, name)


def reconstruct(trace: Iterable[Any]) -> tuple[dict[str, list[Attempt]], list[Violation], TraceReport]:
    """Replay events into per-process attempts while checking mutex and the step bounds."""
    report = TraceReport()
    violations = report.violations
    attempts: dict[str, list[Attempt]] = {}
    pcs: dict[str, int] = {}
    in_cs: set[str] = set()
    abort_count: dict[str, int] = {}
    exit_count: dict[str, int] = {}
    last_seq = -1

    for rec in trace:
        seq, actor, kind = _get(rec, "seq"), _get(rec, "actor"), _get(rec, "kind")
        pre, post, events = _get(rec, "pre_pc"), _get(rec, "post_pc"), tuple(_get(rec, "events"))
        if seq <= last_seq:
            raise TraceError(f"seq {seq} after {last_seq}")
        last_seq = seq
        report.steps += 1

        if kind == "join":
            if actor in pcs:
                raise TraceError(f"seq {seq}: {actor} joined twice")
            pcs[actor] = 1
            attempts[actor] = []
            continue
        pcs.setdefault(actor, 1)
        attempts.setdefault(actor, [])
        if pre != pcs[actor]:
            raise TraceError(f"seq {seq}: {actor} pre_pc {pre} but tracked pc {pcs[actor]}")
        mine = attempts[actor]
        current = mine[-1] if mine and mine[-1].end is None else None

        if kind == "abort-signal":
            if pre == 1:
                raise TraceError(f"seq {seq}: abort signal to {actor} in the remainder")
            if current is not None and current.signal is None:
                current.signal = seq
            if pre in TRY_PCS:
                abort_count[actor] = 0
            continue

        for ev in events:
            if ev == "attempt_start":
                if current is not None:
                    raise TraceError(f"seq {seq}: {actor} starts an attempt inside another")
                current = Attempt(actor, seq)
                mine.append(current)
                report.attempts += 1
            elif current is None:
                raise TraceError(f"seq {seq}: {actor} emits {ev} outside an attempt")
            elif ev == "doorway_complete":
                current.doorway = seq
            elif ev == "cs_enter":
                if in_cs:
                    violations.append(Violation("mutex", seq, f"{actor} enters CS held by {sorted(in_cs)}"))
                in_cs.add(actor)
                current.cs_enter = seq
                report.cs_entries += 1
                abort_count.pop(actor, None)
            elif ev == "cs_exit":
                if actor not in in_cs:
                    raise TraceError(f"seq {seq}: {actor} exits a CS it is not in")
                in_cs.discard(actor)
                exit_count[actor] = 0
            elif ev in ("attempt_end_success", "attempt_end_abort"):
                current.end = seq
                current.success = ev == "attempt_end_success"
                report.aborts += not current.success
            elif ev != "join":
                raise TraceError(f"seq {seq}: unknown event {ev!r}")

        if actor in abort_count:
            abort_count[actor] += 1
        if actor in exit_count:
            exit_count[actor] += 1
        pcs[actor] = post
        if post == 1:
            if actor in abort_count:
                n = abort_count.pop(actor)
                report.max_abort_steps = max(report.max_abort_steps, n)
                if n > FAST_ABORT_BOUND:
                    violations.append(Violation("fast_abort", seq, f"{actor} took {n} steps to abort"))
            if actor in exit_count:
                n = exit_count.pop(actor)
                report.max_exit_steps = max(report.max_exit_steps, n)
                if n > EXIT_BOUND:
                    violations.append(Violation("exit_bound", seq, f"{actor} took {n} steps to exit"))
        at7 = [p for p, pc in pcs.items() if pc == 7]
        if len(at7) > 1:
            violations.append(Violation("mutex", seq, f"several processes at pc=7: {sorted(at7)}"))
    return attempts, violations, report


def passages(attempts: list[Attempt]) -> list[Passage]:
    out: list[Passage] = []
    run: list[Attempt] = []
    for a in attempts:
        run.append(a)
        if a.success:
            out.append(Passage(a.pid, run))
            run = []
    if run:
        out.append(Passage(run[0].pid, run))
    return out


def afcfs_violations(all_passages: list[Passage]) -> list[Violation]:
    """Passages pi, pi' with doorway(pi) < start(pi') but cs(pi') < cs(pi).

    Sweep over passages by start time, keeping the latest CS entry among the
    passages whose final doorway already happened.
    """
    entering = [p for p in all_passages if p.cs_enter is not None and p.doorway is not None]
    by_doorway = sorted(entering, key=lambda p: p.doorway)
    doorways = [p.doorway for p in by_doorway]
    out = []
    best: Passage | None = None
    added = 0
    for later in sorted(entering, key=lambda p: p.start):
        cut = bisect.bisect_left(doorways, later.start)
        while added < cut:
            cand = by_doorway[added]
            if best is None or cand.cs_enter > best.cs_enter:
                best = cand
            added += 1
        if best is not None and best.cs_enter > later.cs_enter:
            out.append(
                Violation(
                    "afcfs",
                    later.cs_enter,
                    f"{best.pid} finished its doorway at {best.doorway} before {later.pid} began at "
                    f"{later.start}, yet {later.pid} entered at {later.cs_enter} before {best.cs_enter}",
                )
            )
    return out


def analyze_trace(trace: Iterable[Any], fair: bool = False) -> TraceReport:
    attempts, _, report = reconstruct(trace)
    all_passages = [ps for mine in attempts.values() for ps in passages(mine)]
    report.violations.extend(afcfs_violations(all_passages))
    if fair:
        for mine in attempts.values():
            for a in mine:
                if a.signal is None and a.end is not None and a.cs_enter is None:
                    report.violations.append(
                        Violation("starvation", a.end, f"{a.pid} ended an unsignalled attempt without the CS")
                    )
    report.violations.sort(key=lambda v: (v.step_seq if v.step_seq is not None else -1))
    return report
