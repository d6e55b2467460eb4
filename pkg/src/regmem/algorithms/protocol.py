"""The register-emulation protocol contract and the generic client automata.

A protocol is described by an :class:`AlgorithmSpec`.  Servers are given as a
pure receive function.  Writers are phase-driven: the engine owns the writer
automaton and only calls the phase callbacks, and only ``Phase.build`` ever
sees the value being written.  This makes every writer transition other than
message construction oblivious to the value by construction.  Readers are
free-form and supplied as a :class:`ReaderProtocol`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional, Protocol, Sequence

from ..encoding import encode
from ..errors import ActorUnavailable
from ..model import VALUE_DEPENDENT, VALUE_INDEPENDENT, ActorId, Message, Send, server

IDLE = "idle"
RUNNING = "running"
DONE = "done"


def _keep(ctx: Any, src: int, payload: Any) -> Any:
    return ctx


def _same(ctx: Any) -> Any:
    return ctx


@dataclass(frozen=True)
class Phase:
    """One writer phase: send to every destination, then await a quorum.

    The quorum system is every subset of the destinations with at least
    ``quorum_size`` members.
    """

    name: str
    value_dependent: bool
    quorum_size: int
    build: Callable[[Any, Any, int], Any]
    absorb: Callable[[Any, int, Any], Any] = _keep
    finish: Callable[[Any], Any] = _same
    destinations: Optional[tuple[int, ...]] = None

    def targets(self, n_servers: int) -> tuple[int, ...]:
        if self.destinations is not None:
            return self.destinations
        return tuple(range(1, n_servers + 1))

    def quorum_system(self, n_servers: int) -> list[frozenset[int]]:
        """Minimal quorums, listed explicitly."""
        return [frozenset(c) for c in itertools.combinations(self.targets(n_servers), self.quorum_size)]

    def is_quorum(self, responded: frozenset[int]) -> bool:
        return len(responded) >= self.quorum_size


@dataclass(frozen=True)
class PhasePlan:
    phases: tuple[Phase, ...]
    start: Callable[[int, int], Any]

    @property
    def value_dependent_index(self) -> Optional[int]:
        for i, phase in enumerate(self.phases):
            if phase.value_dependent:
                return i
        return None


class WriterMeta(NamedTuple):
    status: str
    op_seq: int
    phase: int
    pending: tuple[int, ...]
    responded: frozenset
    ctx: Any


class WriterState(NamedTuple):
    """Writer local state as the triple (value, metadata, h(metadata, value))."""

    v: Any
    m: WriterMeta
    h: Any


class ReaderState(NamedTuple):
    status: str
    op_seq: int
    proto: Any
    outbox: tuple[Send, ...]
    result: Optional[tuple]


class ServerSlot(NamedTuple):
    state: Any
    outbox: tuple[Message, ...]


class ReaderProtocol(Protocol):
    def start(self, reader: int, op_seq: int) -> tuple[Any, list[Send]]: ...

    def receive(self, proto: Any, src: int, body: Any) -> tuple[Any, list[Send], Optional[tuple]]: ...


def _no_h(m: WriterMeta, v: Any) -> tuple:
    return ()


def _project(ws: WriterState) -> tuple:
    return (ws.m, ws.h)


def label_classifier(value_dependent: Sequence[str]) -> Callable[[str], str]:
    """Classifier that tags the listed action labels as value-dependent."""
    marked = frozenset(value_dependent)

    def classify(label: str) -> str:
        return VALUE_DEPENDENT if label in marked else VALUE_INDEPENDENT

    return classify


@dataclass(frozen=True, eq=False)
class AlgorithmSpec:
    name: str
    n_servers: int
    f: int
    n_values: int
    server_init: Callable[[int], Any]
    server_on_receive: Callable[[int, Any, ActorId, Any], tuple[Any, list[Send]]]
    writer_plan: PhasePlan
    reader_protocol: ReaderProtocol
    classify_send: Callable[[str], str]
    initial_value: int = 0
    nu: int = 1
    gossips: bool = False
    writer_h: Callable[[WriterMeta, Any], Any] = _no_h
    metadata_projection: Callable[[WriterState], tuple] = _project
    serialize_state: Callable[[Any], bytes] = encode
    payload_bits: Optional[Callable[[Any], int]] = None
    params: dict = field(default_factory=dict)

    @property
    def values(self) -> range:
        return range(self.n_values)

    def describe(self) -> dict:
        return {"algorithm": self.name, "N": self.n_servers, "f": self.f, "V": self.n_values,
                "nu": self.nu, "gossips": self.gossips, **self.params}


# generic writer automaton

def writer_idle() -> WriterState:
    return WriterState(None, WriterMeta(IDLE, 0, 0, (), frozenset(), None), ())


def _writer(spec: AlgorithmSpec, v: Any, m: WriterMeta) -> WriterState:
    return WriterState(v, m, spec.writer_h(m, v))


def writer_invoke(spec: AlgorithmSpec, index: int, ws: WriterState, value: Any) -> WriterState:
    if ws.m.status != IDLE:
        raise ActorUnavailable(f"writer {index} is busy")
    seq = ws.m.op_seq + 1
    plan = spec.writer_plan
    first = plan.phases[0]
    m = WriterMeta(RUNNING, seq, 0, first.targets(spec.n_servers), frozenset(), plan.start(index, seq))
    return _writer(spec, value, m)


def writer_current_phase(spec: AlgorithmSpec, ws: WriterState) -> Optional[Phase]:
    if ws.m.status != RUNNING:
        return None
    return spec.writer_plan.phases[ws.m.phase]


def writer_next_send(spec: AlgorithmSpec, ws: WriterState) -> Optional[Send]:
    phase = writer_current_phase(spec, ws)
    if phase is None or not ws.m.pending:
        return None
    m = ws.m
    dst = m.pending[0]
    body = (phase.name, (m.op_seq, m.phase), phase.build(m.ctx, ws.v, dst))
    return Send(server(dst), body, phase.name)


def _advance(spec: AlgorithmSpec, v: Any, m: WriterMeta) -> WriterState:
    phase = spec.writer_plan.phases[m.phase]
    if m.pending or not phase.is_quorum(m.responded):
        return _writer(spec, v, m)
    ctx = phase.finish(m.ctx)
    nxt = m.phase + 1
    if nxt < len(spec.writer_plan.phases):
        targets = spec.writer_plan.phases[nxt].targets(spec.n_servers)
        return _writer(spec, v, WriterMeta(RUNNING, m.op_seq, nxt, targets, frozenset(), ctx))
    return _writer(spec, v, WriterMeta(DONE, m.op_seq, m.phase, (), frozenset(), ctx))


def writer_sent(spec: AlgorithmSpec, ws: WriterState) -> WriterState:
    return _advance(spec, ws.v, ws.m._replace(pending=ws.m.pending[1:]))


def writer_receive(spec: AlgorithmSpec, ws: WriterState, src: ActorId, body: Any) -> WriterState:
    m = ws.m
    _, rid, payload = body
    if m.status != RUNNING or rid != (m.op_seq, m.phase) or src.index in m.responded:
        return ws
    phase = spec.writer_plan.phases[m.phase]
    ctx = phase.absorb(m.ctx, src.index, payload)
    return _advance(spec, ws.v, m._replace(ctx=ctx, responded=m.responded | {src.index}))


def writer_respond(spec: AlgorithmSpec, ws: WriterState) -> WriterState:
    return _writer(spec, ws.v, ws.m._replace(status=IDLE))


# generic reader automaton

def reader_idle() -> ReaderState:
    return ReaderState(IDLE, 0, None, (), None)


def reader_invoke(spec: AlgorithmSpec, index: int, rs: ReaderState) -> ReaderState:
    if rs.status != IDLE:
        raise ActorUnavailable(f"reader {index} is busy")
    seq = rs.op_seq + 1
    proto, sends = spec.reader_protocol.start(index, seq)
    return ReaderState(RUNNING, seq, proto, tuple(sends), None)


def reader_receive(spec: AlgorithmSpec, rs: ReaderState, src: ActorId, body: Any) -> ReaderState:
    if rs.status != RUNNING:
        return rs
    proto, sends, result = spec.reader_protocol.receive(rs.proto, src.index, body)
    status = DONE if result is not None else RUNNING
    return ReaderState(status, rs.op_seq, proto, rs.outbox + tuple(sends), result)
