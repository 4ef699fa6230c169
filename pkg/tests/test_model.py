import pytest

from abortlock.model import (
    NIL,
    SENTINEL,
    TOKEN,
    ConfigError,
    NodeRef,
    Underivable,
    derive_queue,
    initial_config,
    join,
)

from conftest import drive


def test_empty_system_has_only_sentinel_and_tail():
    c = initial_config([])
    assert c.x == SENTINEL
    assert c.deref(SENTINEL) is TOKEN
    assert c.node_set() == {SENTINEL}
    assert derive_queue(c).k == 0


def test_single_process_initial_words():
    c = initial_config(["p1"])
    ps = c.proc("p1")
    assert c.deref(ps.mynode) is NIL
    assert c.go("p1") is False
    assert ps.pc == 1
    assert c.x == SENTINEL
    assert c.cached("p1")


def test_two_processes_start_with_empty_queue(two):
    view = derive_queue(two)
    assert view.k == 0
    assert view.A == (SENTINEL,)
    assert view.Q == ()


def test_duplicate_ids_rejected():
    with pytest.raises(ConfigError):
        initial_config(["p1", "p1"])


def test_unknown_process_rejected(two):
    with pytest.raises(ConfigError):
        two.proc("p9")


def test_queue_after_lines_1_and_2(two):
    c, _ = drive(two, ["p1", "p1"])
    view = derive_queue(c)
    assert view.k == 1
    assert view.A == (SENTINEL, c.proc("p1").mynode)
    assert view.Q == ("p1",)
    assert view.position("p1") == 1
    assert view.position("p2") is None


def test_shared_mynode_is_underivable(two):
    c = two.replace_proc("p2", mynode=two.proc("p1").mynode)
    with pytest.raises(Underivable) as err:
        derive_queue(c)
    assert err.value.reason == "no-owner"


def test_cycle_is_underivable(two):
    c, _ = drive(two, ["p1", "p1", "p2", "p2"])
    n1, n2 = c.proc("p1").mynode, c.proc("p2").mynode
    c = c.replace_proc("p1", pred=n2)
    with pytest.raises(Underivable) as err:
        derive_queue(c)
    assert err.value.reason in ("cycle", "too-long")
    assert n1 != n2


def test_dangling_pred_is_underivable(two):
    c, _ = drive(two, ["p1", "p1"])
    c = c.replace_proc("p1", pred=NodeRef(99))
    with pytest.raises(Underivable):
        derive_queue(c)


def test_config_is_value_semantic(two):
    a, _ = drive(two, ["p1", "p2"])
    b, _ = drive(two, ["p1", "p2"])
    assert a == b and hash(a) == hash(b)
    assert a != two


def test_join_appends_fresh_process(two):
    c = join(two, "j1")
    assert c.pids == ("p1", "p2", "j1")
    assert c.deref(c.proc("j1").mynode) is NIL
    assert c.go("j1") is False
    assert derive_queue(c).k == 0
    with pytest.raises(ConfigError):
        join(c, "j1")


def test_partitions_map_owned_words(two):
    parts = two.partitions
    assert parts[0] is None and parts[1] is None
    assert parts[two.layout.node_of["p1"]] == "p1"
    assert parts[two.go_loc("p2")] == "p2"
