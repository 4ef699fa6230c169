import pytest

from abortlock.model import NIL, SENTINEL, TOKEN, GoRef, derive_queue, initial_config
from abortlock.semantics import (
    ABORT_SIGNAL,
    BUSY_WAIT,
    AbortSignal,
    Join,
    Step,
    UsageError,
    enabled_actions,
    step,
)

from conftest import drive


def test_enabled_initially():
    c = initial_config(["p1"])
    assert enabled_actions(c) == {Step("p1")}
    assert enabled_actions(c, allow_aborts=True) == {Step("p1")}


def test_abort_enabled_while_waiting(two):
    c, _ = drive(two, ["p1", "p1", "p2", "p2", "p2"])
    assert c.proc("p2").pc == 4
    assert AbortSignal("p2") in enabled_actions(c, allow_aborts=True)


def test_solo_process_reaches_cs_in_three_steps():
    c, recs = drive(initial_config(["p1"]), ["p1", "p1", "p1"])
    ps = c.proc("p1")
    assert [r.line for r in recs] == [1, 2, 3]
    assert ps.pc == 7 and ps.in_cs
    assert "cs_enter" in recs[-1].events
    assert recs[0].events == ("attempt_start",)
    assert recs[1].events == ("doorway_complete",)


def test_exit_takes_over_predecessor_node():
    c, _ = drive(initial_config(["p1"]), ["p1", "p1", "p1"])
    own = c.proc("p1").mynode
    c, recs = drive(c, ["p1"])
    ps = c.proc("p1")
    assert c.deref(own) is TOKEN
    assert ps.mynode == SENTINEL
    assert ps.pc == 1 and not ps.in_cs
    assert ps.temp is NIL
    assert recs[0].events == ("cs_exit", "attempt_end_success")


def test_waiter_links_into_predecessor_then_is_woken(two):
    c, _ = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2"])
    assert c.proc("p2").pc == 4
    assert c.deref(c.proc("p1").mynode) == GoRef("p2")
    c, recs = drive(c, ["p2"])
    assert recs[0].kind == BUSY_WAIT and c.proc("p2").pc == 4
    c, recs = drive(c, ["p1", "p1"])
    assert [r.line for r in recs] == [7, 8]
    assert c.go("p2") is True
    c, recs = drive(c, ["p2", "p2", "p2"])
    assert [r.line for r in recs] == [4, 5, 6]
    assert c.proc("p2").in_cs
    assert c.go("p2") is False


def test_pending_abort_at_pc4_runs_line_9(two):
    c, _ = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2", "!p2"])
    assert c.proc("p2").abort_pending
    c, recs = drive(c, ["p2"])
    assert recs[0].line == 9
    c, recs = drive(c, ["p2"])
    assert recs[0].line == 10
    assert c.proc("p2").pc == 1
    assert not c.proc("p2").abort_pending
    assert "attempt_end_abort" in recs[0].events


def test_signal_before_line_3_waits_for_it(two):
    c, recs = drive(two, ["p1", "p1", "!p1", "p1"])
    assert recs[2].kind == ABORT_SIGNAL
    assert recs[3].line == 3
    # Token arrived at Line 3: the signal is dropped on CS entry.
    assert c.proc("p1").in_cs and not c.proc("p1").abort_pending


def test_second_signal_rejected(two):
    c, _ = drive(two, ["p1", "p1", "!p1"])
    with pytest.raises(UsageError):
        step(c, AbortSignal("p1"))


def test_signal_in_remainder_rejected(two):
    with pytest.raises(UsageError):
        step(two, AbortSignal("p1"))


def test_join_and_unknown_actor(two):
    res = step(two, Join("j1"))
    assert "j1" in res.config.pids
    with pytest.raises(UsageError):
        step(res.config, Join("j1"))
    with pytest.raises(UsageError):
        step(two, Step("p9"))


def test_every_line_records_one_access(two):
    c, recs = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2", "p2", "p1", "p1", "p2", "p2", "p2", "p2"])
    assert all(len(r.accesses) == 1 for r in recs)
    assert derive_queue(c).k == 0
