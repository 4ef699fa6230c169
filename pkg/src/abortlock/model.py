"""Shared-memory vocabulary for the abortable queue lock.

A :class:`Config` is an immutable snapshot of the whole system: every shared
word, every process's locals and program counter, and the CC cache contents.
Addresses are symbolic location ids; the interpreter only ever compares
values for equality, exactly as the algorithm does.

Location layout is append-only: id 0 is the tail word ``X``, id 1 is the
sentinel node, and each joining process appends its node word followed by its
go word.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Union


class Special(enum.Enum):
    NIL = "nil"
    TOKEN = "token"

    def __repr__(self) -> str:
        return self.value.capitalize()


NIL = Special.NIL
TOKEN = Special.TOKEN


# Address types are NamedTuples so equality and hashing stay in C; the model
# compares addresses on almost every step.
class NodeRef(NamedTuple):
    """Address of a node word."""

    loc: int

    def __repr__(self) -> str:
        return f"&n{self.loc}"


class GoRef(NamedTuple):
    """Address of process ``pid``'s go word."""

    pid: str

    def __repr__(self) -> str:
        return f"&go[{self.pid}]"


# Go words hold plain bools; node words and X hold the rest.
Value = Union[Special, NodeRef, GoRef, bool]

X_LOC = 0
SENTINEL_LOC = 1
SENTINEL = NodeRef(SENTINEL_LOC)


class ConfigError(ValueError):
    """Raised for malformed process sets (duplicate or unknown ids)."""


class Underivable(Exception):
    """The abstract queue cannot be read off the configuration.

    ``reason`` is one of ``duplicate-a0``, ``no-owner``, ``cycle`` or
    ``too-long``; each one means invariants I1-I4 are broken.
    """

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True, slots=True)
class Location:
    kind: str  # "node" | "go" | "X"
    owner: str | None
    id: int


class ProcState(NamedTuple):
    pc: int = 1
    mynode: NodeRef = SENTINEL
    pred: NodeRef = SENTINEL
    temp: Value = NIL
    abort_pending: bool = False
    in_cs: bool = False
    attempts: int = 0  # attempts started so far


@dataclass(frozen=True)
class Layout:
    """Static location map, a pure function of the joined process ids."""

    pids: tuple[str, ...]
    locations: tuple[Location, ...]
    node_of: dict[str, int]
    go_of: dict[str, int]
    index_of: dict[str, int]

    @classmethod
    def build(cls, pids: Iterable[str]) -> Layout:
        pids = tuple(pids)
        locations = [Location("X", None, X_LOC), Location("node", None, SENTINEL_LOC)]
        node_of, go_of, index_of = {}, {}, {}
        for i, pid in enumerate(pids):
            if pid in index_of:
                raise ConfigError(f"duplicate process id {pid!r}")
            index_of[pid] = i
            node_of[pid] = len(locations)
            locations.append(Location("node", pid, len(locations)))
            go_of[pid] = len(locations)
            locations.append(Location("go", pid, len(locations)))
        return cls(pids, tuple(locations), node_of, go_of, index_of)

    @cached_property
    def node_locs(self) -> tuple[int, ...]:
        return tuple(loc.id for loc in self.locations if loc.kind == "node")

    @cached_property
    def node_refs(self) -> frozenset[NodeRef]:
        return frozenset(NodeRef(loc) for loc in self.node_locs)


@dataclass(frozen=True)
class Config:
    """Complete system state. Value-semantic: hashable and safe to share."""

    pids: tuple[str, ...]
    words: tuple[Value, ...]
    procs: tuple[ProcState, ...]
    caches: tuple[frozenset[int], ...]
    layout: Layout = field(compare=False, repr=False, hash=False)

    @property
    def x(self) -> NodeRef:
        return self.words[X_LOC]

    @property
    def partitions(self) -> dict[int, str | None]:
        return {loc.id: loc.owner for loc in self.layout.locations}

    def index(self, pid: str) -> int:
        try:
            return self.layout.index_of[pid]
        except KeyError:
            raise ConfigError(f"unknown process {pid!r}") from None

    def proc(self, pid: str) -> ProcState:
        return self.procs[self.index(pid)]

    def go(self, pid: str) -> bool:
        return self.words[self.layout.go_of[pid]]

    def go_loc(self, pid: str) -> int:
        return self.layout.go_of[pid]

    def deref(self, ref: NodeRef) -> Value:
        return self.words[ref.loc]

    def cached(self, pid: str) -> bool:
        """True iff ``pid``'s go word is in its own CC cache."""
        i = self.index(pid)
        return self.layout.go_of[pid] in self.caches[i]

    def node_set(self) -> frozenset[NodeRef]:
        return self.layout.node_refs

    def replace_proc(self, pid: str, **changes) -> Config:
        i = self.index(pid)
        procs = list(self.procs)
        procs[i] = procs[i]._replace(**changes)
        return Config(self.pids, self.words, tuple(procs), self.caches, self.layout)

    def replace_word(self, loc: int, value: Value) -> Config:
        words = list(self.words)
        words[loc] = value
        return Config(self.pids, tuple(words), self.procs, self.caches, self.layout)


@dataclass(frozen=True)
class QueueView:
    """The abstract queue: node chain ``A`` (a0 first) and process queue ``Q``."""

    k: int
    A: tuple[NodeRef, ...]
    Q: tuple[str, ...]

    def position(self, pid: str) -> int | None:
        """1-based queue position of ``pid``, or None if not queued."""
        try:
            return self.Q.index(pid) + 1
        except ValueError:
            return None


def initial_config(pids: Iterable[str] = ()) -> Config:
    layout = Layout.build(pids)
    words: list[Value] = [SENTINEL, TOKEN]
    procs, caches = [], []
    for pid in layout.pids:
        words += [NIL, False]
        node = NodeRef(layout.node_of[pid])
        procs.append(ProcState(mynode=node, pred=node))
        caches.append(frozenset({layout.go_of[pid]}))
    return Config(layout.pids, tuple(words), tuple(procs), tuple(caches), layout)


def join(config: Config, pid: str) -> Config:
    """Add a fresh process: node word Nil, go word false and cached by its owner."""
    if pid in config.layout.index_of:
        raise ConfigError(f"process {pid!r} already joined")
    layout = Layout.build(config.pids + (pid,))
    node = NodeRef(layout.node_of[pid])
    return Config(
        layout.pids,
        config.words + (NIL, False),
        config.procs + (ProcState(mynode=node, pred=node),),
        config.caches + (frozenset({layout.go_of[pid]}),),
        layout,
    )


def derive_queue(config: Config) -> QueueView:
    owner = {}
    for pid, ps in zip(config.pids, config.procs):
        if ps.mynode in owner:
            raise Underivable("no-owner", f"{owner[ps.mynode]} and {pid} share {ps.mynode!r}")
        owner[ps.mynode] = pid
    free = [NodeRef(loc) for loc in config.layout.node_locs if NodeRef(loc) not in owner]
    if len(free) != 1:
        raise Underivable("duplicate-a0", f"unowned nodes {free}")
    a0 = free[0]

    chain: list[NodeRef] = []
    queue: list[str] = []
    seen = set()
    cur = config.x
    while cur != a0:
        if len(queue) > len(config.pids):
            raise Underivable("too-long", f"chain exceeds {len(config.pids) + 1} nodes")
        if cur in seen:
            raise Underivable("cycle", f"revisited {cur!r}")
        seen.add(cur)
        pid = owner.get(cur)
        if pid is None:
            raise Underivable("no-owner", f"no process owns {cur!r}")
        chain.append(cur)
        queue.append(pid)
        cur = config.procs[config.layout.index_of[pid]].pred
    chain.append(a0)
    return QueueView(len(queue), tuple(reversed(chain)), tuple(reversed(queue)))
