"""Clause-by-clause evaluation of the queue invariant I1..I12."""

from __future__ import annotations

from dataclasses import dataclass

from ..model import NIL, TOKEN, Config, GoRef, QueueView, Underivable, derive_queue


@dataclass(frozen=True)
class Violation:
    clause: str
    step_seq: int | None
    detail: str
    config_hash: int | None = None

    def to_dict(self) -> dict:
        return {
            "clause": self.clause,
            "step_seq": self.step_seq,
            "detail": self.detail,
            "config_hash": self.config_hash,
        }


_I7_LINK_PCS = frozenset({3, 4, 5, 6, 7, 9, 10})


def _fail(clause: str, detail: str, config: Config, seq: int | None) -> Violation:
    return Violation(clause, seq, detail, hash(config))


def check_invariant(config: Config, seq: int | None = None) -> QueueView | Violation:
    """Return the queue view if every clause holds, else the first failing clause."""
    try:
        view = derive_queue(config)
    except Underivable as exc:
        return _fail("queue-underivable", str(exc), config, seq)

    words = config.words
    pids, plist = config.pids, config.procs
    index_of, go_of = config.layout.index_of, config.layout.go_of
    A, Q, k = view.A, view.Q, view.k
    qprocs = [plist[index_of[q]] for q in Q]
    queued = set(Q)

    if config.x != A[k]:
        return _fail("I1", f"X={config.x!r} a_k={A[k]!r}", config, seq)
    for i, ps in enumerate(qprocs, start=1):
        if ps.mynode != A[i]:
            return _fail("I2", f"mynode({Q[i - 1]}) != a_{i}", config, seq)
    for i, ps in enumerate(qprocs, start=1):
        if ps.pred != A[i - 1]:
            return _fail("I3", f"pred({Q[i - 1]}) != a_{i - 1}", config, seq)

    nodes = config.node_set()
    mynodes = {ps.mynode for ps in plist}
    if len(mynodes) != len(plist) or A[0] in mynodes or len(nodes) != len(mynodes) + 1 or not mynodes <= nodes:
        shown = [ps.mynode for ps in plist]
        return _fail("I4", f"N={sorted(n.loc for n in nodes)} mynodes={shown} a0={A[0]!r}", config, seq)

    for pid, ps in zip(pids, plist):
        if ps.pred not in nodes:
            return _fail("I5", f"pred({pid})={ps.pred!r} not a node", config, seq)

    for pid, ps in zip(pids, plist):
        pc = ps.pc
        if pc == 2 or pc == 8:
            v = words[ps.mynode.loc]
            if pid in queued:
                return _fail("I6", f"{pid} at pc={pc} is queued", config, seq)
            if pc == 2 and v is not NIL:
                return _fail("I6", f"{pid} at pc=2 has *mynode={v!r}", config, seq)
            if pc == 8 and v is not NIL and v != GoRef(pid):
                return _fail("I6", f"{pid} at pc=8 has *mynode={v!r}", config, seq)

    for i, ps in enumerate(qprocs, start=1):
        v = words[ps.mynode.loc]
        if ps.pc in _I7_LINK_PCS:
            if v is not NIL and (i == k or v != GoRef(Q[i])):
                return _fail("I7", f"q_{i}={Q[i - 1]} pc={ps.pc} *mynode={v!r}", config, seq)
        elif ps.pc in (1, 11) and v != ps.pred:
            return _fail("I7", f"q_{i}={Q[i - 1]} pc={ps.pc} *mynode={v!r} pred={ps.pred!r}", config, seq)

    for pid, ps in zip(pids, plist):
        if pid not in queued:
            if ps.pc not in (1, 2, 8, 11):
                return _fail("I8", f"unqueued {pid} at pc={ps.pc}", config, seq)
            if words[ps.mynode.loc] == ps.pred:
                return _fail("I8", f"unqueued {pid} has *mynode = pred", config, seq)

    a0 = words[A[0].loc]
    if k == 0 or qprocs[0].pc != 7:
        if a0 is not TOKEN:
            return _fail("I9", f"*a0={a0!r}, expected Token", config, seq)
    elif a0 is not NIL and a0 != GoRef(Q[0]):
        return _fail("I9", f"*a0={a0!r} while q1={Q[0]} at pc=7", config, seq)

    for pid, ps in zip(pids, plist):
        if ps.pc == 7 and (k == 0 or pid != Q[0]):
            return _fail("I10", f"{pid} at pc=7 is not q1", config, seq)

    for i, ps in enumerate(qprocs, start=1):
        q = Q[i - 1]
        if ps.pc != 4 or words[go_of[q]] is not False:
            continue
        target = GoRef(q)
        if i == 1:
            if not any(r.pc == 8 and r.temp == target for r in plist):
                return _fail("I11", f"q1={q} waits with nobody at Line 8 holding its go", config, seq)
        else:
            v = words[A[i - 1].loc]
            pp = qprocs[i - 2]
            if not (v == target or (v == pp.pred and pp.pc == 11 and pp.temp == target)):
                return _fail("I11", f"q_{i}={q} waits but *a_{i - 1}={v!r}", config, seq)
    for pid, ps in zip(pids, plist):
        if (ps.pc == 8 or ps.pc == 11) and not (isinstance(ps.temp, GoRef) and ps.temp.pid in index_of):
            return _fail("I11", f"{pid} at pc={ps.pc} has temp={ps.temp!r}", config, seq)

    for pid, ps in zip(pids, plist):
        if ps.pc == 5 and words[go_of[pid]] is not True:
            return _fail("I12", f"{pid} at pc=5 with go=false", config, seq)

    return view


def check_mutex(config: Config, seq: int | None = None) -> Violation | None:
    at7 = [pid for pid, ps in zip(config.pids, config.procs) if ps.pc == 7]
    in_cs = [pid for pid, ps in zip(config.pids, config.procs) if ps.in_cs]
    if len(at7) > 1 or len(in_cs) > 1:
        return _fail("mutex", f"pc=7: {at7}, in CS: {in_cs}", config, seq)
    bad = [pid for pid, ps in zip(config.pids, config.procs) if ps.in_cs and ps.pc != 7]
    if bad:
        return _fail("mutex", f"in_cs without pc=7: {bad}", config, seq)
    return None


def i9_literal_diverges(config: Config, view: QueueView) -> bool:
    """True when reading I9's ``go_{q1}`` as a go *value* would reject the state.

    Node words never hold booleans, so the literal reading collapses to
    ``*a0 = Nil`` whenever q1 is at pc 7.
    """
    if view.k == 0 or config.proc(view.Q[0]).pc != 7:
        return False
    return config.words[view.A[0].loc] == GoRef(view.Q[0])
