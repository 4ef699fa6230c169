"""Finite-state online monitor for the trace properties.

The exhaustive explorer cannot afford per-path traces, so it carries this
monitor in its search state instead. Over a fixed process set the monitor
tracks, per process, whether the next attempt starts a new passage and the
step counters for pending aborts and exits; per ordered pair ``(p, r)`` it
keeps

* ``ahead``: p's current attempt finished its doorway before r started its
  current passage;
* ``owed``: additionally r has since entered the CS while p still waited, so
  p entering the CS in this same attempt would break AFCFS.

It is deliberately independent of :mod:`.trace`, which recomputes the same
properties from timestamps.
"""

from __future__ import annotations

from typing import NamedTuple

from ..model import Config
from .invariant import Violation
from .trace import EXIT_BOUND, FAST_ABORT_BOUND, TRY_PCS


class MonitorState(NamedTuple):
    fresh: tuple[bool, ...]  # next attempt opens a new passage
    ahead: frozenset[tuple[int, int]]
    owed: frozenset[tuple[int, int]]
    abort_steps: tuple[int | None, ...]
    exit_steps: tuple[int | None, ...]


def initial_monitor(config: Config) -> MonitorState:
    n = len(config.pids)
    return MonitorState((True,) * n, frozenset(), frozenset(), (None,) * n, (None,) * n)


def _set(t: tuple, i: int, v) -> tuple:
    return t[:i] + (v,) + t[i + 1 :]


def monitor_step(state: MonitorState, pre: Config, record, post: Config) -> tuple[MonitorState, list[Violation]]:
    if record.kind == "join":
        raise ValueError("the online monitor works over a fixed process set")
    i = pre.index(record.actor)
    n = len(pre.pids)
    fresh, ahead, owed, aborts, exits = state
    out: list[Violation] = []

    if record.kind == "abort-signal":
        if record.pre_pc in TRY_PCS:
            aborts = _set(aborts, i, 0)
        return MonitorState(fresh, ahead, owed, aborts, exits), out

    events = record.events
    if "attempt_start" in events:
        ahead = frozenset(pair for pair in ahead if pair[0] != i)
        owed = frozenset(pair for pair in owed if pair[0] != i)
        if fresh[i]:
            ahead = frozenset(pair for pair in ahead if pair[1] != i) | {
                (j, i) for j in range(n) if j != i and pre.procs[j].pc not in (1, 2)
            }
            fresh = _set(fresh, i, False)
    if "cs_enter" in events:
        mine = [pair for pair in owed if pair[0] == i]
        if mine:
            out.append(
                Violation(
                    "afcfs",
                    record.seq,
                    f"{record.actor} enters after {[pre.pids[r] for _, r in mine]} overtook it",
                    hash(post),
                )
            )
        owed = owed | {(j, r) for (j, r) in ahead if r == i and post.procs[j].pc in (3, 4, 5, 6)}
        aborts = _set(aborts, i, None)
    if "cs_exit" in events:
        exits = _set(exits, i, 0)

    if aborts[i] is not None:
        aborts = _set(aborts, i, aborts[i] + 1)
    if exits[i] is not None:
        exits = _set(exits, i, exits[i] + 1)

    if record.post_pc == 1:
        if aborts[i] is not None and aborts[i] > FAST_ABORT_BOUND:
            out.append(Violation("fast_abort", record.seq, f"{record.actor}: {aborts[i]} steps", hash(post)))
        if exits[i] is not None and exits[i] > EXIT_BOUND:
            out.append(Violation("exit_bound", record.seq, f"{record.actor}: {exits[i]} steps", hash(post)))
        aborts = _set(aborts, i, None)
        exits = _set(exits, i, None)
        ahead = frozenset(pair for pair in ahead if pair[0] != i)
        owed = frozenset(pair for pair in owed if pair[0] != i)
        fresh = _set(fresh, i, "attempt_end_success" in events)
    else:
        # Counters only matter up to the bound; saturating keeps the state space finite.
        if aborts[i] is not None and aborts[i] > FAST_ABORT_BOUND:
            out.append(Violation("fast_abort", record.seq, f"{record.actor}: over {FAST_ABORT_BOUND} steps", hash(post)))
        if exits[i] is not None and exits[i] > EXIT_BOUND:
            out.append(Violation("exit_bound", record.seq, f"{record.actor}: over {EXIT_BOUND} steps", hash(post)))
    return MonitorState(fresh, ahead, owed, aborts, exits), out
