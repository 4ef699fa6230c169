"""Line-accurate small-step interpreter.

Each numbered line performs exactly one shared access; the local actions
that follow it (loop tests, ``pred`` updates, the ``mynode`` swap after
Line 7) happen atomically with that access. A process whose abort signal is
pending and whose pc is 4, 5 or 6 executes Line 9 on its next step instead of
the line at its pc.

Semantic mutants for checker-sensitivity tests subclass :class:`Interpreter`
and override single ``line_N`` methods.
"""

from __future__ import annotations

from dataclasses import dataclass

from .costs import READ, SWAP, WRITE, cc_apply
from .model import (
    NIL,
    TOKEN,
    X_LOC,
    Config,
    GoRef,
    NodeRef,
    ProcState,
    Value,
    join,
)

EXEC, BUSY_WAIT, ABORT_SIGNAL, JOIN = "exec", "busy-wait", "abort-signal", "join"

ATTEMPT_START = "attempt_start"
DOORWAY_COMPLETE = "doorway_complete"
CS_ENTER = "cs_enter"
CS_EXIT = "cs_exit"
END_SUCCESS = "attempt_end_success"
END_ABORT = "attempt_end_abort"

TRY_PCS = frozenset({2, 3, 4, 5, 6})
JUMP_PCS = frozenset({4, 5, 6})


class UsageError(Exception):
    """An action was applied that is not enabled."""


class ModelSoundnessError(Exception):
    """The interpreter dereferenced Nil/Token or a non-go word at Line 8/11."""


@dataclass(frozen=True)
class Step:
    pid: str


@dataclass(frozen=True)
class AbortSignal:
    pid: str


@dataclass(frozen=True)
class Join:
    pid: str


Action = Step | AbortSignal | Join


@dataclass(frozen=True)
class StepRecord:
    seq: int
    actor: str
    kind: str
    line: int | None
    pre_pc: int | None
    post_pc: int | None
    accesses: tuple[tuple[int, str], ...] = ()
    events: tuple[str, ...] = ()


@dataclass(frozen=True)
class StepResult:
    config: Config
    record: StepRecord


class _Tx:
    """Effects of a single process step, applied to a fresh Config at the end."""

    __slots__ = ("cfg", "pid", "words", "accesses", "events")

    def __init__(self, cfg: Config, pid: str):
        self.cfg = cfg
        self.pid = pid
        self.words: list[Value] | None = None
        self.accesses: list[tuple[int, str]] = []
        self.events: list[str] = []

    def loc(self, ref: Value) -> int:
        if isinstance(ref, NodeRef):
            return ref.loc
        if isinstance(ref, GoRef):
            return self.cfg.layout.go_of[ref.pid]
        raise ModelSoundnessError(f"{self.pid} dereferenced {ref!r}")

    def _get(self, loc: int) -> Value:
        return self.cfg.words[loc] if self.words is None else self.words[loc]

    def _put(self, loc: int, value: Value) -> None:
        if self.words is None:
            self.words = list(self.cfg.words)
        self.words[loc] = value

    def read(self, loc: int) -> Value:
        self.accesses.append((loc, READ))
        return self._get(loc)

    def write(self, loc: int, value: Value) -> None:
        self.accesses.append((loc, WRITE))
        self._put(loc, value)

    def swap(self, loc: int, value: Value) -> Value:
        self.accesses.append((loc, SWAP))
        old = self._get(loc)
        self._put(loc, value)
        return old


class Interpreter:
    def enabled_actions(
        self,
        config: Config,
        allow_aborts: bool = False,
        joinable: tuple[str, ...] = (),
    ) -> set[Action]:
        actions: set[Action] = {Step(pid) for pid in config.pids}
        if allow_aborts:
            actions |= {
                AbortSignal(pid)
                for pid, ps in zip(config.pids, config.procs)
                if ps.pc != 1 and not ps.abort_pending
            }
        actions |= {Join(pid) for pid in joinable if pid not in config.layout.index_of}
        return actions

    def step(self, config: Config, action: Action, seq: int = 0) -> StepResult:
        if isinstance(action, Join):
            if action.pid in config.layout.index_of:
                raise UsageError(f"{action.pid} already joined")
            new = join(config, action.pid)
            return StepResult(new, StepRecord(seq, action.pid, JOIN, None, None, 1, events=("join",)))
        if action.pid not in config.layout.index_of:
            raise UsageError(f"{action.pid} has not joined")
        ps = config.proc(action.pid)
        if isinstance(action, AbortSignal):
            if ps.pc == 1 or ps.abort_pending:
                raise UsageError(f"abort signal not enabled for {action.pid} at pc={ps.pc}")
            new = config.replace_proc(action.pid, abort_pending=True)
            rec = StepRecord(seq, action.pid, ABORT_SIGNAL, None, ps.pc, ps.pc, events=("abort_signal",))
            return StepResult(new, rec)
        if not isinstance(action, Step):
            raise UsageError(f"unknown action {action!r}")

        line = 9 if ps.abort_pending and ps.pc in JUMP_PCS else ps.pc
        tx = _Tx(config, action.pid)
        new_ps, kind = getattr(self, f"line_{line}")(tx, action.pid, ps)
        if new_ps.pc == 1:
            new_ps = new_ps._replace(abort_pending=False)

        i = config.index(action.pid)
        words = config.words if tx.words is None else tuple(tx.words)
        procs = config.procs[:i] + (new_ps,) + config.procs[i + 1 :]
        _, caches = cc_apply(config.caches, i, tx.accesses)
        new = Config(config.pids, words, procs, caches, config.layout)
        rec = StepRecord(seq, action.pid, kind, line, ps.pc, new_ps.pc, tuple(tx.accesses), tuple(tx.events))
        return StepResult(new, rec)

    # Each line returns (new ProcState, record kind).

    def line_1(self, tx: _Tx, p: str, ps: ProcState):
        old = tx.swap(ps.mynode.loc, NIL)
        tx.events.append(ATTEMPT_START)
        ps = ps._replace(attempts=ps.attempts + 1)
        if old != ps.pred:
            return ps._replace(pc=2), EXEC
        tx.events.append(DOORWAY_COMPLETE)
        return ps._replace(pc=3), EXEC

    def line_2(self, tx: _Tx, p: str, ps: ProcState):
        pred = tx.swap(X_LOC, ps.mynode)
        tx.events.append(DOORWAY_COMPLETE)
        return ps._replace(pc=3, pred=pred), EXEC

    def _inspect_pred(self, tx: _Tx, p: str, ps: ProcState):
        temp = tx.swap(tx.loc(ps.pred), GoRef(p))
        ps = ps._replace(temp=temp)
        if temp is TOKEN:
            tx.events.append(CS_ENTER)
            return ps._replace(pc=7, in_cs=True, abort_pending=False), EXEC
        if temp is not NIL and temp != GoRef(p):
            return ps._replace(pc=6, pred=temp), EXEC
        return ps._replace(pc=4), EXEC

    def line_3(self, tx: _Tx, p: str, ps: ProcState):
        return self._inspect_pred(tx, p, ps)

    def line_4(self, tx: _Tx, p: str, ps: ProcState):
        if tx.read(tx.cfg.go_loc(p)) is True:
            return ps._replace(pc=5), EXEC
        return ps, BUSY_WAIT

    def line_5(self, tx: _Tx, p: str, ps: ProcState):
        tx.write(tx.cfg.go_loc(p), False)
        return ps._replace(pc=6), EXEC

    def line_6(self, tx: _Tx, p: str, ps: ProcState):
        return self._inspect_pred(tx, p, ps)

    def line_7(self, tx: _Tx, p: str, ps: ProcState):
        temp = tx.swap(ps.mynode.loc, TOKEN)
        if ps.in_cs:
            tx.events.append(CS_EXIT)
        ps = ps._replace(temp=temp, mynode=ps.pred, in_cs=False)
        if temp is not NIL:
            return ps._replace(pc=8), EXEC
        tx.events.append(END_SUCCESS)
        return ps._replace(pc=1), EXEC

    def line_8(self, tx: _Tx, p: str, ps: ProcState):
        tx.write(self._go_target(tx, p, ps.temp), True)
        tx.events.append(END_SUCCESS)
        return ps._replace(pc=1), EXEC

    def line_9(self, tx: _Tx, p: str, ps: ProcState):
        temp = tx.swap(tx.loc(ps.pred), NIL)
        ps = ps._replace(temp=temp)
        if temp is TOKEN:
            return ps._replace(pc=7), EXEC
        if temp is not NIL and temp != GoRef(p):
            ps = ps._replace(pred=temp)
        return ps._replace(pc=10), EXEC

    def line_10(self, tx: _Tx, p: str, ps: ProcState):
        temp = tx.swap(ps.mynode.loc, ps.pred)
        ps = ps._replace(temp=temp)
        if temp is not NIL:
            return ps._replace(pc=11), EXEC
        tx.events.append(END_ABORT)
        return ps._replace(pc=1), EXEC

    def line_11(self, tx: _Tx, p: str, ps: ProcState):
        tx.write(self._go_target(tx, p, ps.temp), True)
        tx.events.append(END_ABORT)
        return ps._replace(pc=1), EXEC

    @staticmethod
    def _go_target(tx: _Tx, p: str, temp: Value) -> int:
        if not isinstance(temp, GoRef):
            raise ModelSoundnessError(f"{p} would write true through {temp!r}")
        return tx.loc(temp)


DEFAULT = Interpreter()


def enabled_actions(config: Config, allow_aborts: bool = False, joinable: tuple[str, ...] = ()) -> set[Action]:
    return DEFAULT.enabled_actions(config, allow_aborts, joinable)


def step(config: Config, action: Action, seq: int = 0) -> StepResult:
    return DEFAULT.step(config, action, seq)
