import pytest

from abortlock.model import derive_queue, initial_config
from abortlock.verifiers import TraceError, Violation, analyze_trace, initial_monitor, monitor_step
from abortlock.semantics import StepRecord

from conftest import drive


def _line(seq, actor, pre, post, events=(), kind="exec"):
    return {"seq": seq, "actor": actor, "kind": kind, "pre_pc": pre, "post_pc": post, "events": list(events)}


def test_single_attempt_is_clean():
    _, recs = drive(initial_config(["p1"]), ["p1"] * 4)
    rep = analyze_trace(recs)
    assert rep.ok
    assert rep.attempts == rep.cs_entries == 1
    assert rep.max_exit_steps == 1
    assert set(rep.summary().values()) == {"pass"}


def test_abort_at_line_4_takes_at_most_three_steps(two):
    _, recs = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2", "!p2", "p2", "p2"])
    rep = analyze_trace(recs)
    assert rep.ok and rep.aborts == 1
    assert 1 <= rep.max_abort_steps <= 3


def test_fifo_schedule_enters_in_doorway_order(two):
    _, recs = drive(two, ["p1", "p1", "p2", "p2", "p2", "p1", "p1", "p1", "p2", "p2", "p2", "p2", "p2"])
    doorway = [r.actor for r in recs if "doorway_complete" in r.events]
    entered = [r.actor for r in recs if "cs_enter" in r.events]
    assert entered == doorway == ["p1", "p2"]
    assert analyze_trace(recs).ok


def test_duplicate_cs_enter_is_a_mutex_violation():
    trace = [
        _line(0, "p1", 1, 3, ["attempt_start", "doorway_complete"]),
        _line(1, "p2", 1, 3, ["attempt_start", "doorway_complete"]),
        _line(2, "p1", 3, 7, ["cs_enter"]),
        _line(3, "p2", 3, 7, ["cs_enter"]),
    ]
    rep = analyze_trace(trace)
    assert "mutex" in {v.clause for v in rep.violations}
    assert rep.status("mutex") == "fail"


def test_overtaking_is_an_afcfs_violation():
    trace = [
        _line(0, "p1", 1, 3, ["attempt_start", "doorway_complete"]),
        _line(1, "p2", 1, 3, ["attempt_start", "doorway_complete"]),
        _line(2, "p2", 3, 7, ["cs_enter"]),
        _line(3, "p2", 7, 1, ["cs_exit", "attempt_end_success"]),
        _line(4, "p1", 3, 7, ["cs_enter"]),
        _line(5, "p1", 7, 1, ["cs_exit", "attempt_end_success"]),
    ]
    rep = analyze_trace(trace)
    assert [v.clause for v in rep.violations] == ["afcfs"]


def test_slow_exit_breaks_exit_bound():
    trace = [
        _line(0, "p1", 1, 3, ["attempt_start", "doorway_complete"]),
        _line(1, "p1", 3, 7, ["cs_enter"]),
        _line(2, "p1", 7, 8, ["cs_exit"]),
        _line(3, "p1", 8, 8),
        _line(4, "p1", 8, 1, ["attempt_end_success"]),
    ]
    assert [v.clause for v in analyze_trace(trace).violations] == ["exit_bound"]


def test_unsignalled_attempt_without_cs_is_starvation_when_fair():
    trace = [
        _line(0, "p1", 1, 3, ["attempt_start", "doorway_complete"]),
        _line(1, "p1", 3, 1, ["attempt_end_abort"]),
    ]
    assert analyze_trace(trace).ok
    assert [v.clause for v in analyze_trace(trace, fair=True).violations] == ["starvation"]


@pytest.mark.parametrize(
    "trace",
    [
        [_line(1, "p1", 1, 3, ["attempt_start"]), _line(0, "p1", 3, 4)],
        [_line(0, "p1", 1, 3, ["cs_exit"])],
        [_line(0, "p1", 4, 4)],
        [_line(0, "p1", 1, 3, ["teleport"])],
    ],
)
def test_malformed_traces_raise(trace):
    with pytest.raises(TraceError):
        analyze_trace(trace)


def test_aborted_waiter_reclaims_its_position(two):
    c, _ = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2"])
    assert derive_queue(c).Q == ("p1", "p2")
    tail = c.x
    c, recs = drive(c, ["!p2", "p2", "p2"])
    assert [r.line for r in recs[1:]] == [9, 10]
    ps = c.proc("p2")
    assert ps.pc == 1
    assert derive_queue(c).position("p2") == 2
    c, recs = drive(c, ["p2"])
    assert recs[0].line == 1
    assert recs[0].events == ("attempt_start", "doorway_complete")
    assert c.proc("p2").pc == 3
    assert c.x == tail
    assert derive_queue(c).Q == ("p1", "p2")


def _rec(seq, actor, events, kind="exec", pre=None, post=None):
    return StepRecord(seq, actor, kind, 1, pre, post, (), tuple(events))


def test_monitor_catches_overtaking():
    base = initial_config(["p1", "p2"])

    def at(p1, p2):
        return base.replace_proc("p1", pc=p1).replace_proc("p2", pc=p2)

    m = initial_monitor(base)
    steps = [
        (at(1, 1), _rec(0, "p1", ["attempt_start", "doorway_complete"], pre=1, post=3), at(3, 1)),
        (at(3, 1), _rec(1, "p2", ["attempt_start", "doorway_complete"], pre=1, post=3), at(3, 3)),
        (at(3, 3), _rec(2, "p2", ["cs_enter"], pre=3, post=7), at(3, 7)),
        (at(3, 7), _rec(3, "p2", ["cs_exit", "attempt_end_success"], pre=7, post=1), at(3, 1)),
        (at(3, 1), _rec(4, "p1", ["cs_enter"], pre=3, post=7), at(7, 1)),
    ]
    found = []
    for pre, rec, post in steps:
        m, bad = monitor_step(m, pre, rec, post)
        found += bad
    assert [v.clause for v in found] == ["afcfs"]
    assert isinstance(found[0], Violation)
    offline = analyze_trace(rec for _, rec, _ in steps)
    assert [v.clause for v in offline.violations] == ["afcfs"]


def test_monitor_agrees_with_offline_on_random_runs():
    import random

    from abortlock.semantics import DEFAULT, AbortSignal, Step

    for seed in range(5):
        rng = random.Random(seed)
        c = initial_config(["p1", "p2", "p3"])
        m = initial_monitor(c)
        online, recs = [], []
        for seq in range(3000):
            pid = rng.choice(c.pids)
            ps = c.proc(pid)
            if ps.pc in (2, 3, 4, 5, 6) and not ps.abort_pending and rng.random() < 0.3:
                action = AbortSignal(pid)
            else:
                action = Step(pid)
            res = DEFAULT.step(c, action, seq)
            m, bad = monitor_step(m, c, res.record, res.config)
            online += bad
            recs.append(res.record)
            c = res.config
        offline = analyze_trace(recs).violations
        assert {v.clause for v in online} == {v.clause for v in offline} == set()
