"""Schedulers and the bounded exhaustive explorer.

``run`` drives one seeded random or round-robin schedule and checks every
state and transition online. ``explore`` walks every configuration reachable
under attempt budgets, carrying the trace monitor in the search state so the
path properties (AFCFS, abort and exit bounds) are checked on every path.
"""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Sequence

from .costs import CC_PER_ATTEMPT, DSM_PER_ATTEMPT, StepCost, step_costs
from .model import Config, QueueView, Underivable, derive_queue, initial_config
from .semantics import (
    DEFAULT,
    TRY_PCS,
    AbortSignal,
    Interpreter,
    Join,
    ModelSoundnessError,
    Step,
    StepRecord,
)
from .verifiers import (
    Violation,
    analyze_trace,
    check_amortized_step,
    check_invariant,
    check_lemma1,
    check_mutex,
    check_progress_step,
    exceeds_proof_constant,
    i9_literal_diverges,
    initial_monitor,
    monitor_step,
)
from .verifiers.progress import PC11_DIGIT, WAITING_PCS, front_pc

CHECKS = frozenset({"invariant", "progress", "amortized", "trace"})
SCHEDULERS = ("random", "round-robin", "exhaustive")
FAIRNESS_WINDOW = 64


class BudgetExceeded(Exception):
    pass


@dataclass
class ScheduleParams:
    procs: int | Sequence[str] = 2
    scheduler: str = "random"
    seed: int = 0
    max_steps: int = 10_000
    abort_rate: float | str = 0.0
    attempts_per_proc: int | None = None
    fairness: str = "weak"
    checks: frozenset[str] = CHECKS
    late_joiners: int = 0
    max_states: int = 5_000_000
    stop_on_violation: bool = True

    def __post_init__(self):
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        if self.scheduler == "exhaustive":
            if self.abort_rate in (0, 0.0):
                self.abort_rate = "none"
            if self.abort_rate not in ("none", "nondet"):
                raise ValueError("exhaustive exploration takes aborts 'none' or 'nondet'")
            if self.attempts_per_proc is None:
                raise ValueError("exhaustive exploration needs an attempt budget")
        elif not (isinstance(self.abort_rate, (int, float)) and 0.0 <= self.abort_rate <= 1.0):
            raise ValueError(f"abort rate must lie in [0, 1], got {self.abort_rate!r}")
        if isinstance(self.procs, int) and self.procs < 0:
            raise ValueError("process count must be non-negative")
        if self.max_steps <= 0 or (self.attempts_per_proc is not None and self.attempts_per_proc <= 0):
            raise ValueError("bounds must be positive")
        if self.fairness not in ("weak", "none"):
            raise ValueError(f"unknown fairness {self.fairness!r}")
        unknown = set(self.checks) - CHECKS
        if unknown:
            raise ValueError(f"unknown checks {sorted(unknown)}")
        self.checks = frozenset(self.checks)

    @property
    def pids(self) -> tuple[str, ...]:
        if isinstance(self.procs, int):
            return tuple(f"p{i}" for i in range(1, self.procs + 1))
        return tuple(self.procs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "procs": list(self.pids),
            "scheduler": self.scheduler,
            "seed": self.seed,
            "max_steps": self.max_steps,
            "abort_rate": self.abort_rate,
            "attempts_per_proc": self.attempts_per_proc,
            "fairness": self.fairness,
            "checks": sorted(self.checks),
            "late_joiners": self.late_joiners,
        }


@dataclass
class ExploreReport:
    states_visited: int = 0
    transitions: int = 0
    violations: list[Violation] = field(default_factory=list)
    max_queue_length: int = 0
    rmr_totals: dict[str, int] = field(default_factory=lambda: {"cc": 0, "dsm": 0})
    attempts_total: int = 0
    cs_entries: int = 0
    aborts: int = 0
    elapsed: float = 0.0
    complete: bool = True
    configs_visited: int = 0
    notes: Counter = field(default_factory=Counter)
    reproducer: dict[str, int] | None = None
    max_abort_steps: int = 0  # offline trace analysis, random runs only
    max_exit_steps: int = 0

    @property
    def status(self) -> str:
        if self.violations:
            return "fail"
        return "pass" if self.complete else "incomplete"

    def to_dict(self, params: ScheduleParams | None = None) -> dict[str, Any]:
        n = self.attempts_total
        out = {
            "params": params.to_dict() if params else {},
            "totals": {
                "steps": self.transitions,
                "attempts": n,
                "cs_entries": self.cs_entries,
                "aborts": self.aborts,
                "rmr_cc": self.rmr_totals["cc"],
                "rmr_dsm": self.rmr_totals["dsm"],
            },
            "bounds": {
                "rmr_cc_per_attempt": self.rmr_totals["cc"] / n if n else 0.0,
                "rmr_dsm_per_attempt": self.rmr_totals["dsm"] / n if n else 0.0,
                "cc_limit": CC_PER_ATTEMPT,
                "dsm_limit": DSM_PER_ATTEMPT,
            },
            "violations": [v.to_dict() for v in self.violations],
            "status": self.status,
            "states_visited": self.states_visited,
            "configs_visited": self.configs_visited,
            "max_queue_length": self.max_queue_length,
            "max_abort_steps": self.max_abort_steps,
            "max_exit_steps": self.max_exit_steps,
            "complete": self.complete,
            "notes": dict(sorted(self.notes.items())),
            "elapsed": round(self.elapsed, 3),
        }
        if self.reproducer:
            out["reproducer"] = self.reproducer
        return out


@dataclass(frozen=True)
class TracedStep:
    """One trace line: the step record plus its costs and the post-state queue."""

    record: StepRecord
    cost_cc: StepCost
    cost_dsm: StepCost
    queue: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        r = self.record
        return {
            "seq": r.seq,
            "actor": r.actor,
            "kind": r.kind,
            "line": r.line,
            "pre_pc": r.pre_pc,
            "post_pc": r.post_pc,
            "rmr_cc": self.cost_cc.rmr,
            "rmr_dsm": self.cost_dsm.rmr,
            "phi_cc": self.cost_cc.phi_after,
            "phi_dsm": self.cost_dsm.phi_after,
            "events": list(r.events),
            "queue": list(self.queue),
        }


def _state_notes(config: Config, view: QueueView, notes: Counter) -> None:
    if i9_literal_diverges(config, view):
        notes["i9_literal_divergence"] += 1
    if any(ps.pc in WAITING_PCS for ps in config.procs) and front_pc(config, view) == 11:
        notes["pc11_at_qm"] += 1


def _check_state(config: Config, seq: int, checks, notes: Counter) -> tuple[QueueView | None, list[Violation]]:
    if "invariant" not in checks:
        try:
            return derive_queue(config), []
        except Underivable as exc:
            return None, [Violation("queue-underivable", seq, str(exc), hash(config))]
    out = []
    view = check_invariant(config, seq)
    if isinstance(view, Violation):
        return None, [view]
    bad = check_mutex(config, seq) or check_lemma1(config, view, seq)
    if bad:
        out.append(bad)
    else:
        _state_notes(config, view, notes)
    return view, out


def _check_transition(
    pre, view_pre, res, view_post, checks, notes, phis_before=None
) -> tuple[StepCost, StepCost, list[Violation]]:
    record = res.record
    cost_cc, cost_dsm = step_costs(pre, res.config, record, phis_before)
    out = []
    if "amortized" in checks:
        out += check_amortized_step(record, cost_cc, cost_dsm)
        if exceeds_proof_constant(record, cost_cc):
            notes[f"cc_line{record.line}_above_proof_constant"] += 1
    if "progress" in checks and view_pre is not None and view_post is not None and record.kind != "join":
        actor = record.actor if record.kind in ("exec", "busy-wait") else None
        bad = check_progress_step(pre, actor, res.config, record.seq, view_pre, view_post)
        if bad:
            out.append(bad)
    return cost_cc, cost_dsm, out


def run(params: ScheduleParams, interpreter: Interpreter = DEFAULT) -> tuple[list[TracedStep], ExploreReport]:
    if params.scheduler not in ("random", "round-robin"):
        raise ValueError("run() drives the random and round-robin schedulers")
    started = time.perf_counter()
    rng = random.Random(params.seed)
    checks = params.checks
    report = ExploreReport()
    trace: list[TracedStep] = []

    config = initial_config(params.pids)
    joiners = [f"j{i}" for i in range(1, params.late_joiners + 1)]
    last_run: dict[str, int] = {pid: 0 for pid in config.pids}
    rr_next = 0
    view, bad = _check_state(config, 0, checks, report.notes)
    report.violations += bad
    seq = 0
    phis = None

    def apply(action) -> bool:
        nonlocal config, view, seq, phis
        try:
            res = interpreter.step(config, action, seq)
        except ModelSoundnessError as exc:
            report.violations.append(Violation("soundness", seq, str(exc), hash(config)))
            return False
        new_view, bad = _check_state(res.config, seq, checks, report.notes)
        cost_cc, cost_dsm, bad2 = _check_transition(config, view, res, new_view, checks, report.notes, phis)
        phis = (cost_cc.phi_after, cost_dsm.phi_after)
        report.violations += bad + bad2
        trace.append(TracedStep(res.record, cost_cc, cost_dsm, new_view.Q if new_view else ()))
        report.rmr_totals["cc"] += cost_cc.rmr
        report.rmr_totals["dsm"] += cost_dsm.rmr
        ev = res.record.events
        report.attempts_total += "attempt_start" in ev
        report.cs_entries += "cs_enter" in ev
        report.aborts += "attempt_end_abort" in ev
        if new_view is not None:
            report.max_queue_length = max(report.max_queue_length, new_view.k)
        config, view = res.config, new_view
        seq += 1
        return not (bad or bad2)

    budget = params.attempts_per_proc
    while seq < params.max_steps:
        if report.violations and params.stop_on_violation:
            break
        if joiners and rng.random() < 0.001:
            pid = joiners.pop(0)
            apply(Join(pid))
            last_run[pid] = seq
            continue
        eligible = [
            pid for pid, ps in zip(config.pids, config.procs) if ps.pc != 1 or budget is None or ps.attempts < budget
        ]
        if not eligible:
            break
        starving = [pid for pid in eligible if seq - last_run[pid] >= FAIRNESS_WINDOW * len(config.pids)]
        if params.fairness == "weak" and starving:
            pid = min(starving, key=lambda p: last_run[p])
        elif params.scheduler == "random":
            pid = rng.choice(eligible)
        else:
            order = config.pids
            for k in range(len(order)):
                cand = order[(rr_next + k) % len(order)]
                if cand in eligible:
                    pid = cand
                    rr_next = (rr_next + k + 1) % len(order)
                    break
        ps = config.proc(pid)
        if params.abort_rate and ps.pc in TRY_PCS and not ps.abort_pending and rng.random() < params.abort_rate:
            if not apply(AbortSignal(pid)) and params.stop_on_violation:
                break
            if seq >= params.max_steps:
                break
        last_run[pid] = seq
        apply(Step(pid))

    if "trace" in checks and not (report.violations and params.stop_on_violation):
        tr = analyze_trace((t.record for t in trace), fair=params.fairness == "weak")
        report.violations += tr.violations
        report.max_abort_steps, report.max_exit_steps = tr.max_abort_steps, tr.max_exit_steps
    if "amortized" in checks and not report.violations:
        n = report.attempts_total
        if report.rmr_totals["dsm"] > DSM_PER_ATTEMPT * n:
            report.violations.append(
                Violation("lemma3", seq, f"DSM total {report.rmr_totals['dsm']} > {DSM_PER_ATTEMPT} x {n}")
            )
        if report.rmr_totals["cc"] > CC_PER_ATTEMPT * n:
            report.violations.append(
                Violation("lemma4", seq, f"CC total {report.rmr_totals['cc']} > {CC_PER_ATTEMPT} x {n}")
            )
    if report.violations:
        first = report.violations[0]
        report.reproducer = {"seed": params.seed, "step": first.step_seq if first.step_seq is not None else seq}
    report.states_visited = len(trace) + 1
    report.transitions = len(trace)
    report.elapsed = time.perf_counter() - started
    return trace, report


def explore(params: ScheduleParams, interpreter: Interpreter = DEFAULT) -> ExploreReport:
    if params.scheduler != "exhaustive":
        raise ValueError("explore() needs scheduler='exhaustive'")
    started = time.perf_counter()
    checks = params.checks
    report = ExploreReport()
    budget = params.attempts_per_proc
    nondet = params.abort_rate == "nondet"
    use_monitor = "trace" in checks

    init = initial_config(params.pids)
    init_state = (init, initial_monitor(init) if use_monitor else None)
    view, bad = _check_state(init, 0, checks, report.notes)
    report.violations += bad
    visited = {init_state: view}
    configs = {init}
    stack = [init_state]

    while stack and not (report.violations and params.stop_on_violation):
        state = stack.pop()
        config, mon = state
        view = visited[state]
        actions = [
            Step(pid) for pid, ps in zip(config.pids, config.procs) if ps.pc != 1 or ps.attempts < budget
        ]
        if nondet:
            actions += [
                AbortSignal(pid)
                for pid, ps in zip(config.pids, config.procs)
                if ps.pc != 1 and not ps.abort_pending
            ]
        for action in actions:
            seq = report.transitions
            report.transitions += 1
            try:
                res = interpreter.step(config, action, seq)
            except ModelSoundnessError as exc:
                report.violations.append(Violation("soundness", seq, str(exc), hash(config)))
                break
            succ_config = res.config
            succ_mon = mon
            if use_monitor:
                succ_mon, bad_mon = monitor_step(mon, config, res.record, succ_config)
                report.violations += bad_mon
            succ = (succ_config, succ_mon)
            known = succ in visited
            succ_view = visited[succ] if known else None
            if not known:
                succ_view, bad = _check_state(succ_config, seq, checks, report.notes)
                report.violations += bad
            _, _, bad = _check_transition(config, view, res, succ_view, checks, report.notes)
            report.violations += bad
            if report.violations and params.stop_on_violation:
                break
            if not known:
                if len(visited) >= params.max_states:
                    report.complete = False
                    stack.clear()
                    break
                visited[succ] = succ_view
                configs.add(succ_config)
                if succ_view is not None:
                    report.max_queue_length = max(report.max_queue_length, succ_view.k)
                stack.append(succ)

    report.states_visited = len(visited)
    report.configs_visited = len(configs)
    report.elapsed = time.perf_counter() - started
    if report.violations:
        report.reproducer = {"seed": params.seed, "step": report.violations[0].step_seq or 0}
    return report
