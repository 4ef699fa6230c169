"""Distance-to-CS, promoter sets, and the per-step descent check."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, total_ordering

from ..model import Config, GoRef, QueueView, derive_queue
from .invariant import Violation

WAITING_PCS = frozenset({3, 4, 5, 6})
DISTANCE_PCS = frozenset({3, 4, 5, 6, 7})

# Eq. (1) digits keyed by pc; pc 4 splits on go.
_DIGITS = {1: 3, 3: 2, 5: 7, 6: 2, 7: 1, 9: 6, 10: 5}
# pc 11 has no published digit; 4 is the only value below f(10) and above f(1).
PC11_DIGIT = 4


class UndefinedDigit(ValueError):
    def __init__(self, pid: str, pc: int):
        super().__init__(f"f undefined for {pid} at pc={pc}")
        self.pid = pid
        self.pc = pc


def f_value(config: Config, r: str) -> int:
    """Literal digit table; pc 2, 8 and 11 are undefined."""
    ps = config.proc(r)
    if ps.pc == 4:
        return 8 if config.go(r) is True else 9
    try:
        return _DIGITS[ps.pc]
    except KeyError:
        raise UndefinedDigit(r, ps.pc) from None


def _digit(config: Config, r: str) -> int:
    if config.proc(r).pc == 11:
        return PC11_DIGIT
    return f_value(config, r)


@total_ordering
@dataclass(frozen=True)
class Distance:
    digits: tuple[int, ...]

    def __lt__(self, other: Distance) -> bool:
        return (len(self.digits), self.digits) < (len(other.digits), other.digits)

    def __int__(self) -> int:
        return int("".join(map(str, self.digits)))

    def __str__(self) -> str:
        return "".join(map(str, self.digits))


@dataclass(frozen=True)
class Front:
    """The first queued process not at pc 1 (q_m), shared by every waiter behind it."""

    m: int | None
    pid: str | None
    pc: int | None
    digit: int | None
    promoters: frozenset[str]


def front(config: Config, view: QueueView) -> Front:
    procs, index_of = config.procs, config.layout.index_of
    for m, q in enumerate(view.Q, start=1):
        ps = procs[index_of[q]]
        if ps.pc == 1:
            continue
        if ps.pc == 4 and config.go(q) is False:
            target = GoRef(q)
            psi = frozenset(r for r, rs in zip(config.pids, procs) if rs.pc in (8, 11) and rs.temp == target)
            return Front(m, q, 4, 9, psi)
        try:
            digit = _digit(config, q)
        except UndefinedDigit:
            digit = None
        return Front(m, q, ps.pc, digit, frozenset({q}))
    return Front(None, None, None, None, frozenset())


def _distance(fr: Front, i: int, p: str) -> Distance:
    if fr.m is None or fr.m > i:
        raise ValueError(f"{p} has no process ahead of it off pc 1")
    if fr.digit is None:
        raise UndefinedDigit(fr.pid, fr.pc)
    return Distance((3,) * (fr.m - 1) + (fr.digit,) + (0,) * (i - fr.m))


def _position(config: Config, view: QueueView, p: str, pc: int | None = None) -> int:
    if pc is None:
        pc = config.proc(p).pc
    if pc not in DISTANCE_PCS:
        raise ValueError(f"{p} at pc={pc} has no distance")
    i = view.position(p)
    if i is None:
        raise ValueError(f"{p} at pc={pc} is not queued")
    return i


def delta(config: Config, p: str, view: QueueView | None = None) -> Distance:
    view = view or derive_queue(config)
    i = _position(config, view, p)
    return _distance(front(config, view), i, p)


def promoters(config: Config, p: str, view: QueueView | None = None) -> frozenset[str]:
    view = view or derive_queue(config)
    _position(config, view, p)
    return front(config, view).promoters


def front_pc(config: Config, view: QueueView) -> int | None:
    """pc of q_m; used to spot the pc=11 extension being exercised."""
    return front(config, view).pc


@lru_cache(maxsize=4096)
def _digits(m: int, digit: int, i: int) -> tuple[int, ...]:
    return (3,) * (m - 1) + (digit,) + (0,) * (i - m)


def _key(fr: Front, i: int | None, pc: int, p: str) -> tuple[int, tuple[int, ...]]:
    """Distance as a (length, digits) tuple, which sorts like Distance."""
    if pc not in DISTANCE_PCS:
        raise ValueError(f"{p} at pc={pc} has no distance")
    if i is None:
        raise ValueError(f"{p} at pc={pc} is not queued")
    if fr.m is None or fr.m > i:
        raise ValueError(f"{p} has no process ahead of it off pc 1")
    if fr.digit is None:
        raise UndefinedDigit(fr.pid, fr.pc)
    return i, _digits(fr.m, fr.digit, i)


def check_lemma1(config: Config, view: QueueView, seq: int | None = None) -> Violation | None:
    fr = None
    pos = {q: i for i, q in enumerate(view.Q, start=1)}
    for pid, ps in zip(config.pids, config.procs):
        if ps.pc in WAITING_PCS or ps.in_cs:
            if fr is None:
                fr = front(config, view)
            try:
                key = _key(fr, pos.get(pid), ps.pc, pid)
            except ValueError as exc:
                return Violation("lemma2", seq, f"delta({pid}) undefined: {exc}", hash(config))
            if key < (1, (1,)) or (key == (1, (1,))) != ps.in_cs:
                d = Distance(key[1])
                return Violation("lemma2", seq, f"lemma1: delta({pid})={d} in_cs={ps.in_cs}", hash(config))
    return None


def check_progress_step(
    before: Config,
    actor: str | None,
    after: Config,
    seq: int | None = None,
    view_before: QueueView | None = None,
    view_after: QueueView | None = None,
) -> Violation | None:
    """Descent check for every waiting process across one transition.

    ``actor`` is None for environment actions (abort signals, joins), which
    are never promoters.
    """
    waiting = [
        (p, ps.pc, after.procs[i].pc)
        for i, (p, ps) in enumerate(zip(before.pids, before.procs))
        if ps.pc in WAITING_PCS and after.procs[i].pc in DISTANCE_PCS
    ]
    if not waiting:
        return None
    view_before = view_before or derive_queue(before)
    view_after = view_after or derive_queue(after)
    fr0 = front(before, view_before)
    fr1 = front(after, view_after)
    pos0 = {q: i for i, q in enumerate(view_before.Q, start=1)}
    pos1 = {q: i for i, q in enumerate(view_after.Q, start=1)}
    for p, pc0, pc1 in waiting:
        try:
            k0 = _key(fr0, pos0.get(p), pc0, p)
            k1 = _key(fr1, pos1.get(p), pc1, p)
        except ValueError as exc:
            return Violation("lemma2", seq, f"delta({p}) undefined: {exc}", hash(after))
        if k1 < k0:
            continue
        d0, d1 = Distance(k0[1]), Distance(k1[1])
        if actor in fr0.promoters:
            return Violation(
                "lemma2", seq, f"promoter {actor} stepped but delta({p}) {d0} -> {d1}", hash(after)
            )
        if k1 != k0 or fr1.promoters != fr0.promoters:
            return Violation(
                "lemma2",
                seq,
                f"{actor} stepped: delta({p}) {d0} -> {d1}, "
                f"promoters {sorted(fr0.promoters)} -> {sorted(fr1.promoters)}",
                hash(after),
            )
    return None
