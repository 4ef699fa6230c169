import pytest

from abortlock.model import derive_queue
from abortlock.verifiers import (
    PC11_DIGIT,
    Distance,
    UndefinedDigit,
    check_lemma1,
    check_progress_step,
    delta,
    f_value,
    promoters,
)
from abortlock.semantics import Step, step

from conftest import SCHEDULE_3370, drive


def test_f_table_literals(two):
    c, _ = drive(two, ["p1", "p1", "p1"])
    assert f_value(c, "p1") == 1
    c, _ = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2"])
    assert f_value(c, "p2") == 9
    c, _ = drive(two, ["p1"])
    with pytest.raises(UndefinedDigit):
        f_value(c, "p1")


def test_distance_order_is_length_then_digits():
    assert Distance((9,)) < Distance((1, 0))
    assert Distance((3, 2)) < Distance((3, 7))
    assert int(Distance((3, 3, 7, 0))) == 3370
    assert str(Distance((1,))) == "1"


def test_worked_example_3370():
    from abortlock.model import initial_config

    c, _ = drive(initial_config(["p1", "p2", "p3", "p4"]), SCHEDULE_3370)
    view = derive_queue(c)
    assert view.k == 4
    assert [c.proc(q).pc for q in view.Q[:3]] == [1, 1, 5]
    assert int(delta(c, view.Q[3])) == 3370
    assert promoters(c, view.Q[3]) == {view.Q[2]}


def test_in_cs_distance_is_one(two):
    c, _ = drive(two, ["p1", "p1", "p1"])
    assert delta(c, "p1") == Distance((1,))
    assert check_lemma1(c, derive_queue(c)) is None


def test_front_waiter_at_line_3(two):
    c, _ = drive(two, ["p1", "p1"])
    assert delta(c, "p1") == Distance((2,))
    assert promoters(c, "p1") == {"p1"}


def test_front_entering_cs_lowers_waiters_behind(two):
    c, _ = drive(two, ["p1", "p1", "p2", "p2"])
    before = delta(c, "p2")
    res = step(c, Step("p1"))
    assert check_progress_step(c, "p1", res.config) is None
    assert delta(res.config, "p2") < before


def test_unrelated_step_leaves_distance(two):
    from abortlock.model import initial_config

    c, _ = drive(initial_config(["p1", "p2", "p3"]), ["p1", "p1", "p2", "p2", "p2"])
    d, psi = delta(c, "p2"), promoters(c, "p2")
    res = step(c, Step("p3"))
    assert check_progress_step(c, "p3", res.config) is None
    assert delta(res.config, "p2") == d and promoters(res.config, "p2") == psi


def test_waker_at_line_8_drops_digit_9_to_8(two):
    c, _ = drive(two, ["p1", "p1", "p1", "p2", "p2", "p2", "p2", "p1"])
    assert c.proc("p1").pc == 8
    assert str(delta(c, "p2")) == "9"
    assert promoters(c, "p2") == {"p1"}
    res = step(c, Step("p1"))
    assert str(delta(res.config, "p2")) == "8"
    assert check_progress_step(c, "p1", res.config) is None


def test_promoter_stall_is_flagged(two):
    c, _ = drive(two, ["p1", "p1", "p2", "p2"])
    res = step(c, Step("p1"))
    # Pretend p1's Line 3 changed nothing: the promoter stepped but p2 gained nothing.
    v = check_progress_step(c, "p1", c)
    assert v is not None and v.clause == "lemma2"
    assert res.config != c


def test_pc11_front_uses_extension_digit():
    import random

    from abortlock.model import initial_config
    from abortlock.semantics import AbortSignal

    rng = random.Random(5)
    c = initial_config(["p1", "p2", "p3"])
    for seq in range(20_000):
        view = derive_queue(c)
        heads = [q for q in view.Q if c.proc(q).pc != 1]
        waiting = [q for q in view.Q if c.proc(q).pc in (3, 4, 5, 6)]
        if heads and c.proc(heads[0]).pc == 11 and waiting:
            m = view.position(heads[0])
            d = delta(c, waiting[-1])
            assert d.digits[m - 1] == PC11_DIGIT
            assert d.digits[: m - 1] == (3,) * (m - 1)
            return
        pid = rng.choice(c.pids)
        ps = c.proc(pid)
        if ps.pc in (2, 3, 4, 5, 6) and not ps.abort_pending and rng.random() < 0.4:
            c = step(c, AbortSignal(pid), seq).config
        else:
            c = step(c, Step(pid), seq).config
    pytest.fail("no state with q_m at pc 11 reached")
