import pytest

from abortlock.model import initial_config
from abortlock.semantics import DEFAULT, AbortSignal, Step


def drive(config, actions, interpreter=DEFAULT):
    """Apply actions in order; a bare pid string means Step(pid), "!pid" an abort signal."""
    records = []
    for seq, a in enumerate(actions):
        if isinstance(a, str):
            a = AbortSignal(a[1:]) if a.startswith("!") else Step(a)
        res = interpreter.step(config, a, seq)
        config = res.config
        records.append(res.record)
    return config, records


# Reaches q1, q2 at pc 1 (aborted, still queued), q3 at pc 5 and q4 waiting.
SCHEDULE_3370 = [
    "p4", "p2", "p3", "p2", "p1", "p2", "p3", "p1", "p2", "p1", "p4", "p2", "p4", "p1", "p2",
    "!p1", "p3", "!p4", "p1", "p3", "p3", "p2", "p4", "p2", "p3", "p3", "p1", "p4", "p4", "p2",
]


@pytest.fixture
def two():
    return initial_config(["p1", "p2"])
