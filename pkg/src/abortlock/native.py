"""Thread-safe abortable queue lock on hardware atomic exchange.

Every shared word (the tail ``X``, the sentinel, one node word and one go
word per registered thread) is a sequentially consistent 64-bit atomic.
Word values encode Nil as 0, Token as 1 and a word's address as
``8 * (index + 1)``, so both reserved values stay clear of every aligned
address.

Threads register once and keep their handle. ``acquire`` returns
:data:`ACQUIRED` or :data:`ABORTED`; an abort is requested by setting the
handle's flag from any thread.
"""

from __future__ import annotations

import enum
import random
import threading
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import atomics

NIL = 0
TOKEN = 1

# Line 4 backoff: a few hot polls, then parked waits doubling up to the cap.
# Whoever sets a waiter's go word or abort flag also wakes it, so the cap
# only bounds how stale a missed wake-up can get.
SPIN_LIMIT = 4
BACKOFF_MIN = 1e-5
BACKOFF_MAX = 5e-3


class Outcome(enum.Enum):
    ACQUIRED = "acquired"
    ABORTED = "aborted"


ACQUIRED = Outcome.ACQUIRED
ABORTED = Outcome.ABORTED


class LockUsageError(RuntimeError):
    pass


def _word(value: int = NIL):
    w = atomics.atomic(width=8, atype=atomics.INT)
    w.store(value)
    return w


def _addr(index: int) -> int:
    return 8 * (index + 1)


X_ADDR = _addr(0)
SENTINEL_ADDR = _addr(1)


@dataclass
class OpCounts:
    """Shared operations issued through one handle."""

    total: int = 0
    last_release: int = 0
    last_abort: int = 0  # from the poll that saw the flag up to the return


class ThreadHandle:
    """Per-thread state: the locals of Algorithm 1 plus the abort flag."""

    def __init__(self, lock: AbortableLock, node: int, go: int):
        self.lock = lock
        self.thread_id = threading.get_ident()
        self.mynode = node
        self.pred = node
        self.go = go
        self.holding = False
        self.ops = OpCounts()
        self._abort = threading.Event()
        self._wake = threading.Event()  # scheduling hint only, never shared state

    def request_abort(self) -> None:
        self._abort.set()
        self._wake.set()

    def clear_abort(self) -> None:
        self._abort.clear()

    @property
    def abort_requested(self) -> bool:
        return self._abort.is_set()


class AbortableLock:
    def __init__(self):
        self._words = [_word(NIL), _word(TOKEN)]  # X, SENTINEL
        self._words[0].store(SENTINEL_ADDR)
        self._registry = threading.Lock()  # guards registration only
        self._handles: dict[int, ThreadHandle] = {}
        self._by_go: dict[int, ThreadHandle] = {}

    # Shared word access, one atomic instruction each.

    def _at(self, addr: int):
        return self._words[addr // 8 - 1]

    def _xchg(self, h: ThreadHandle, addr: int, value: int) -> int:
        h.ops.total += 1
        return self._at(addr).exchange(value)

    def _store(self, h: ThreadHandle, addr: int, value: int) -> None:
        h.ops.total += 1
        self._at(addr).store(value)

    def _raise_go(self, h: ThreadHandle, addr: int) -> None:
        """Lines 8 and 11: store true into a go word and wake its owner."""
        self._store(h, addr, 1)
        waiter = self._by_go.get(addr)
        if waiter is not None:
            waiter._wake.set()

    def _load(self, h: ThreadHandle, addr: int) -> int:
        h.ops.total += 1
        return self._at(addr).load()

    def register(self) -> ThreadHandle:
        tid = threading.get_ident()
        with self._registry:
            if tid in self._handles:
                raise LockUsageError("thread already registered")
            node = len(self._words)
            self._words.append(_word(NIL))
            self._words.append(_word(0))
            h = ThreadHandle(self, _addr(node), _addr(node + 1))
            self._handles[tid] = h
            self._by_go[h.go] = h
        return h

    def word_value(self, addr: int) -> int:
        return self._at(addr).load()

    def memory_audit(self) -> dict[str, int]:
        n = len(self._handles)
        return {
            "threads": n,
            "words": len(self._words),
            "expected": 2 * n + 2,
            "node_words": n,
            "go_words": n,
        }

    def _check(self, h: ThreadHandle) -> None:
        if h.lock is not self:
            raise LockUsageError("handle belongs to another lock")
        if h.thread_id != threading.get_ident():
            raise LockUsageError("handle used from a thread that did not register it")

    def acquire(self, h: ThreadHandle) -> Outcome:
        self._check(h)
        if h.holding:
            raise LockUsageError("acquire while already holding the lock")
        # Line 1, then Line 2 unless the old node is reclaimed.
        if self._xchg(h, h.mynode, NIL) != h.pred:
            h.pred = self._xchg(h, X_ADDR, h.mynode)
        spins, pause = 0, BACKOFF_MIN
        while True:
            # Lines 3 and 6.
            temp = self._xchg(h, h.pred, h.go)
            if temp == TOKEN:
                h.holding = True
                return ACQUIRED
            if temp != NIL and temp != h.go:
                h.pred = temp
                if self._aborting(h):
                    return self._abort_path(h)
                continue
            # Line 4, polling the abort flag between reads.
            while True:
                if self._aborting(h):
                    return self._abort_path(h)
                if self._load(h, h.go):
                    break
                spins += 1
                if spins > SPIN_LIMIT:
                    h._wake.wait(pause)
                    h._wake.clear()
                    pause = min(2 * pause, BACKOFF_MAX)
            if self._aborting(h):
                return self._abort_path(h)
            self._store(h, h.go, 0)  # Line 5
            if self._aborting(h):
                return self._abort_path(h)

    def _aborting(self, h: ThreadHandle) -> bool:
        if h.abort_requested:
            h.ops.last_abort = h.ops.total
            return True
        return False

    def _abort_path(self, h: ThreadHandle) -> Outcome:
        temp = self._xchg(h, h.pred, NIL)  # Line 9
        if temp == TOKEN:
            # The lock arrived meanwhile: pass it straight on.
            self._exit(h)
        else:
            if temp != NIL and temp != h.go:
                h.pred = temp
            temp = self._xchg(h, h.mynode, h.pred)  # Line 10
            if temp != NIL:
                self._raise_go(h, temp)  # Line 11
        h.ops.last_abort = h.ops.total - h.ops.last_abort
        return ABORTED

    def _exit(self, h: ThreadHandle) -> None:
        temp = self._xchg(h, h.mynode, TOKEN)  # Line 7
        h.mynode = h.pred
        if temp != NIL:
            self._raise_go(h, temp)  # Line 8

    def release(self, h: ThreadHandle) -> None:
        self._check(h)
        if not h.holding:
            raise LockUsageError("release without holding the lock")
        before = h.ops.total
        h.holding = False
        self._exit(h)
        h.ops.last_release = h.ops.total - before


@dataclass
class StressReport:
    threads: int
    iterations: int
    cs_entries: int = 0
    aborts_completed: int = 0
    counter_value: int = 0
    wall_time: float = 0.0
    deadlock: bool = False
    memory: dict[str, int] = field(default_factory=dict)
    max_release_ops: int = 0
    max_abort_ops: int = 0

    @property
    def ok(self) -> bool:
        return (
            not self.deadlock
            and self.counter_value == self.cs_entries
            and self.memory.get("words") == self.memory.get("expected")
        )

    @property
    def status(self) -> str:
        return "pass" if self.ok else "fail"

    def to_dict(self) -> dict:
        return {**asdict(self), "status": self.status}


def stress(
    threads: int,
    iterations: int,
    abort_probability: float | Sequence[float] = 0.0,
    seed: int = 0,
    timeout: float = 120.0,
    lock: AbortableLock | None = None,
) -> StressReport:
    """Hammer one lock from ``threads`` threads, ``iterations`` attempts each.

    Before an attempt a thread raises its own abort flag with its abort
    probability; the flag is observed at the first waiting-room poll, so an
    uncontended attempt still acquires. The CS does a deliberately split
    read-yield-write on a plain counter, so any overlap loses an increment.
    """
    if threads < 1:
        raise ValueError("need at least one thread")
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    if isinstance(abort_probability, (int, float)):
        probs = [float(abort_probability)] * threads
    else:
        probs = [float(p) for p in abort_probability]
        if len(probs) != threads:
            raise ValueError("one abort probability per thread")
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise ValueError("abort probability must lie in [0, 1]")

    lock = lock or AbortableLock()
    report = StressReport(threads, iterations)
    counter = [0]
    tally = threading.Lock()  # guards the report tallies, never the CS
    ready = threading.Barrier(threads)
    errors: list[BaseException] = []

    def worker(k: int) -> None:
        try:
            rng = random.Random(f"{seed}:{k}")
            h = lock.register()
            ready.wait()
            entries = aborts = max_rel = max_abort = 0
            for _ in range(iterations):
                if probs[k] and rng.random() < probs[k]:
                    h.request_abort()
                outcome = lock.acquire(h)
                h.clear_abort()
                if outcome is ACQUIRED:
                    v = counter[0]
                    time.sleep(1e-6)
                    counter[0] = v + 1
                    entries += 1
                    lock.release(h)
                    max_rel = max(max_rel, h.ops.last_release)
                else:
                    aborts += 1
                    max_abort = max(max_abort, h.ops.last_abort)
            with tally:
                report.cs_entries += entries
                report.aborts_completed += aborts
                report.max_release_ops = max(report.max_release_ops, max_rel)
                report.max_abort_ops = max(report.max_abort_ops, max_abort)
        except BaseException as exc:  # surfaced after join
            errors.append(exc)

    started = time.perf_counter()
    pool = [threading.Thread(target=worker, args=(k,), daemon=True) for k in range(threads)]
    for t in pool:
        t.start()
    deadline = started + timeout
    for t in pool:
        t.join(max(0.0, deadline - time.perf_counter()))
    report.wall_time = time.perf_counter() - started
    report.deadlock = any(t.is_alive() for t in pool)
    if errors and not report.deadlock:
        raise errors[0]
    report.counter_value = counter[0]
    report.memory = lock.memory_audit()
    return report
