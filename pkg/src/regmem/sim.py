"""Deterministic discrete-event engine for servers, clients and channels.

Every actor is an I/O automaton.  A server or client step performs one
locally controlled action (emit the head of its outbox, or respond to its
environment).  A channel step delivers one message and applies the
destination's receive transition, which may queue new sends in the
destination's outbox.  Queued sends only reach a channel when the owner takes
its own step, so adjacent points differ in at most one server plus the
channels touched by the acting component.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple, Optional, Sequence, Union

from .algorithms.protocol import (
    DONE,
    RUNNING,
    AlgorithmSpec,
    ReaderState,
    ServerSlot,
    WriterState,
    reader_idle,
    reader_invoke,
    reader_receive,
    writer_current_phase,
    writer_idle,
    writer_invoke,
    writer_next_send,
    writer_receive,
    writer_respond,
    writer_sent,
)
from .encoding import digest, encode
from .errors import ActorUnavailable, FailedServerInFingerprint, NoEnabledAction, NonTermination
from .model import (
    READER,
    SERVER,
    VALUE_DEPENDENT,
    WRITER,
    ActorId,
    Channel,
    Message,
    Send,
    reader,
    server,
    writer,
)

DEFAULT_STEP_BUDGET = 10**6

Actor = Union[ActorId, Channel]
StopPredicate = Callable[["Configuration"], bool]


def step_budget() -> int:
    raw = os.environ.get("REGMEM_STEP_BUDGET")
    return int(raw) if raw else DEFAULT_STEP_BUDGET


class Event(NamedTuple):
    op_id: str
    client: str
    kind: str
    phase: str
    value: Any
    point: int


class DropRecord(NamedTuple):
    step: int
    channel: str
    digest: str


@dataclass(frozen=True, eq=False)
class System:
    """Static part of a simulation: the protocol and the actor population."""

    spec: AlgorithmSpec
    n_writers: int = 1
    n_readers: int = 1
    servers: tuple[ActorId, ...] = field(init=False)
    writers: tuple[ActorId, ...] = field(init=False)
    readers: tuple[ActorId, ...] = field(init=False)
    channels: tuple[Channel, ...] = field(init=False)
    rotation: tuple[Actor, ...] = field(init=False)

    def __post_init__(self) -> None:
        servers = tuple(server(i) for i in range(1, self.spec.n_servers + 1))
        writers = tuple(writer(i) for i in range(1, self.n_writers + 1))
        readers = tuple(reader(i) for i in range(1, self.n_readers + 1))
        nodes = servers + writers + readers
        chans = [Channel(a, b) for a in nodes for b in nodes
                 if a != b and (a.kind == SERVER or b.kind == SERVER)]
        chans.sort(key=lambda c: c.rank)
        object.__setattr__(self, "servers", servers)
        object.__setattr__(self, "writers", writers)
        object.__setattr__(self, "readers", readers)
        object.__setattr__(self, "channels", tuple(chans))
        object.__setattr__(self, "rotation", nodes + tuple(chans))

    def server_channels(self, among: Optional[Iterable[int]] = None) -> tuple[Channel, ...]:
        keep = None if among is None else {server(n) for n in among}
        return tuple(c for c in self.channels if c.between_servers
                     and (keep is None or (c.src in keep and c.dst in keep)))

    def channels_of(self, actor: ActorId) -> tuple[Channel, ...]:
        return tuple(c for c in self.channels if actor in (c.src, c.dst))


@dataclass(frozen=True, eq=False)
class Configuration:
    """Immutable global snapshot.  Only non-empty channel queues are stored."""

    system: System
    local: dict
    channels: dict
    failed: frozenset = frozenset()
    frozen: frozenset = frozenset()
    step_count: int = 0
    history: tuple = ()
    drops: tuple = ()

    @property
    def spec(self) -> AlgorithmSpec:
        return self.system.spec

    def queue(self, ch: Channel) -> tuple[Message, ...]:
        return self.channels.get(ch, ())

    def server_slot(self, n: int) -> ServerSlot:
        return self.local[server(n)]

    def server_bytes(self, n: int) -> bytes:
        return self.spec.serialize_state(self.local[server(n)])

    def client(self, actor: ActorId) -> Any:
        return self.local[actor]

    def channel_bytes(self, ch: Channel) -> bytes:
        return encode(self.queue(ch))

    def live_servers(self) -> list[int]:
        return [s.index for s in self.system.servers if s not in self.failed]


class Step(NamedTuple):
    actor: Actor
    label: str
    config: Configuration
    sent: Optional[Channel] = None
    delivered: Optional[Channel] = None
    dropped: Optional[Channel] = None


def initial_configuration(system: System) -> Configuration:
    spec = system.spec
    local: dict = {s: ServerSlot(spec.server_init(s.index), ()) for s in system.servers}
    local.update({w: writer_idle() for w in system.writers})
    local.update({r: reader_idle() for r in system.readers})
    return Configuration(system, local, {})


def fail_servers(cfg: Configuration, which: Iterable[int]) -> Configuration:
    """Crash servers.  Messages queued towards them are dropped and logged."""
    failed = set(cfg.failed)
    channels = dict(cfg.channels)
    drops = list(cfg.drops)
    for n in sorted(which):
        actor = server(n)
        if actor not in cfg.local:
            raise ValueError(f"no server {n}")
        failed.add(actor)
        for ch in cfg.system.channels:
            if ch.dst == actor and ch in channels:
                for msg in channels.pop(ch):
                    drops.append(DropRecord(cfg.step_count, str(ch), digest(msg.payload)))
    return _replace(cfg, failed=frozenset(failed), channels=channels, drops=tuple(drops))


def freeze(cfg: Configuration, actors: Iterable[Actor]) -> Configuration:
    return _replace(cfg, frozen=cfg.frozen | frozenset(actors))


def _replace(cfg: Configuration, **changes: Any) -> Configuration:
    fields = dict(system=cfg.system, local=cfg.local, channels=cfg.channels, failed=cfg.failed,
                  frozen=cfg.frozen, step_count=cfg.step_count, history=cfg.history, drops=cfg.drops)
    fields.update(changes)
    return Configuration(**fields)


# enabledness

def _deliverable_index(cfg: Configuration, ch: Channel, hold: frozenset) -> Optional[int]:
    q = cfg.channels.get(ch)
    if not q:
        return None
    if ch.src not in hold:
        return 0
    for i, msg in enumerate(q):
        if msg.tag != VALUE_DEPENDENT:
            return i
    return None


def _client_enabled(cfg: Configuration, actor: ActorId, hold: frozenset) -> bool:
    st = cfg.local[actor]
    if actor.kind == WRITER:
        if st.m.status == DONE:
            return True
        if st.m.status != RUNNING or not st.m.pending:
            return False
        if actor in hold:
            phase = writer_current_phase(cfg.spec, st)
            return cfg.spec.classify_send(phase.name) != VALUE_DEPENDENT
        return True
    return bool(st.outbox) or st.status == DONE


def is_enabled(cfg: Configuration, actor: Actor, hold: frozenset = frozenset()) -> bool:
    """True if ``actor`` is live, not frozen, and has something to do."""
    if actor in cfg.frozen:
        return False
    if isinstance(actor, Channel):
        if actor.src in cfg.failed or actor.dst in cfg.failed:
            return False
        return _deliverable_index(cfg, actor, hold) is not None
    if actor in cfg.failed:
        return False
    if actor.kind == SERVER:
        return bool(cfg.local[actor].outbox)
    return _client_enabled(cfg, actor, hold)


def enabled_actors(cfg: Configuration, hold: frozenset = frozenset()) -> list[Actor]:
    """Enabled actors in rotation order, scanning only non-empty channels."""
    out: list[Actor] = [a for a in cfg.local if is_enabled(cfg, a, hold)]
    out.sort(key=lambda a: a.rank)
    chans = [c for c in cfg.channels if is_enabled(cfg, c, hold)]
    chans.sort(key=lambda c: c.rank)
    return out + chans


# transitions

def _post(cfg: Configuration, channels: dict, drops: list, msg: Message) -> tuple[Optional[Channel], Optional[Channel]]:
    ch = msg.channel
    if msg.dst in cfg.failed:
        drops.append(DropRecord(cfg.step_count + 1, str(ch), digest(msg.payload)))
        return None, ch
    channels[ch] = channels.get(ch, ()) + (msg,)
    return ch, None


def _tag(spec: AlgorithmSpec, src: ActorId, send: Send) -> Message:
    return Message(src, send.dst, send.body, spec.classify_send(send.label), send.label)


def _receive(spec: AlgorithmSpec, local: dict, msg: Message) -> None:
    dst = msg.dst
    st = local[dst]
    if dst.kind == SERVER:
        state, sends = spec.server_on_receive(dst.index, st.state, msg.src, msg.body)
        out = tuple(_tag(spec, dst, s) for s in sends)
        local[dst] = ServerSlot(state, st.outbox + out)
    elif dst.kind == WRITER:
        local[dst] = writer_receive(spec, st, msg.src, msg.body)
    else:
        local[dst] = reader_receive(spec, st, msg.src, msg.body)


def apply_step(cfg: Configuration, actor: Actor, choice: Optional[int] = None,
               hold: frozenset = frozenset()) -> Step:
    """Perform one action of ``actor`` and return the resulting step record.

    ``choice`` selects which queued message a channel delivers; by default the
    first one that is not held back.  ``hold`` names writers whose
    value-dependent sends and deliveries are suppressed.
    """
    if actor in cfg.frozen:
        raise ActorUnavailable(f"{actor} is frozen")
    spec = cfg.spec
    local = dict(cfg.local)
    channels = dict(cfg.channels)
    drops = list(cfg.drops)
    history = cfg.history
    point = cfg.step_count + 1
    sent = delivered = dropped = None

    if isinstance(actor, Channel):
        if actor.src in cfg.failed or actor.dst in cfg.failed:
            raise ActorUnavailable(f"{actor} touches a failed server")
        q = channels.get(actor, ())
        idx = _deliverable_index(cfg, actor, hold) if choice is None else choice
        if idx is None or idx >= len(q):
            raise NoEnabledAction(f"{actor} has nothing to deliver")
        msg = q[idx]
        if actor.src in hold and msg.tag == VALUE_DEPENDENT:
            raise NoEnabledAction(f"{actor} may not deliver a value-dependent message")
        rest = q[:idx] + q[idx + 1:]
        if rest:
            channels[actor] = rest
        else:
            del channels[actor]
        _receive(spec, local, msg)
        delivered = actor
        label = f"deliver:{msg.label}"
    else:
        if actor in cfg.failed:
            raise ActorUnavailable(f"{actor} has failed")
        if not is_enabled(cfg, actor, hold):
            raise NoEnabledAction(f"{actor} has no enabled action")
        st = local[actor]
        if actor.kind == SERVER:
            msg = st.outbox[0]
            local[actor] = ServerSlot(st.state, st.outbox[1:])
            sent, dropped = _post(cfg, channels, drops, msg)
            label = f"send:{msg.label}"
        elif actor.kind == WRITER:
            if st.m.status == DONE:
                local[actor] = writer_respond(spec, st)
                history += (Event(f"{actor}.{st.m.op_seq}", str(actor), "write", "respond", None, point),)
                label = "respond:write"
            else:
                send = writer_next_send(spec, st)
                msg = _tag(spec, actor, send)
                local[actor] = writer_sent(spec, st)
                sent, dropped = _post(cfg, channels, drops, msg)
                label = f"send:{msg.label}"
        else:
            if st.outbox:
                msg = _tag(spec, actor, st.outbox[0])
                local[actor] = st._replace(outbox=st.outbox[1:])
                sent, dropped = _post(cfg, channels, drops, msg)
                label = f"send:{msg.label}"
            else:
                local[actor] = ReaderState("idle", st.op_seq, st.proto, (), None)
                history += (Event(f"{actor}.{st.op_seq}", str(actor), "read", "respond", st.result[0], point),)
                label = "respond:read"

    new = _replace(cfg, local=local, channels=channels, step_count=point, history=history, drops=tuple(drops))
    return Step(actor, label, new, sent, delivered, dropped)


def step(cfg: Configuration, actor: Actor, choice: Optional[int] = None) -> Configuration:
    return apply_step(cfg, actor, choice).config


def apply_invoke(cfg: Configuration, client: ActorId, value: Any = None) -> Step:
    """Environment input: start an operation at an idle client."""
    if client in cfg.failed or client in cfg.frozen:
        raise ActorUnavailable(f"{client} is unavailable")
    spec = cfg.spec
    local = dict(cfg.local)
    st = local[client]
    point = cfg.step_count + 1
    if client.kind == WRITER:
        new_st = writer_invoke(spec, client.index, st, value)
        seq, kind = new_st.m.op_seq, "write"
    elif client.kind == READER:
        new_st = reader_invoke(spec, client.index, st)
        seq, kind, value = new_st.op_seq, "read", None
    else:
        raise ValueError("only clients can be invoked")
    local[client] = new_st
    event = Event(f"{client}.{seq}", str(client), kind, "invoke", value, point)
    new = _replace(cfg, local=local, step_count=point, history=cfg.history + (event,))
    return Step(client, f"invoke:{kind}", new)


def invoke(cfg: Configuration, client: ActorId, value: Any = None) -> Configuration:
    return apply_invoke(cfg, client, value).config


def responses(cfg: Configuration, client: Optional[ActorId] = None, kind: Optional[str] = None) -> int:
    name = None if client is None else str(client)
    return sum(1 for e in cfg.history if e.phase == "respond"
               and (name is None or e.client == name) and (kind is None or e.kind == kind))


def client_done(client: ActorId, count: int) -> StopPredicate:
    """Stop predicate: ``client`` has completed ``count`` operations."""
    return lambda cfg: responses(cfg, client) >= count


# executions

class Execution:
    """A recorded run.  Point 0 is the initial configuration, point i the
    configuration after step i."""

    def __init__(self, initial: Configuration) -> None:
        self.initial = initial
        self.steps: list[Step] = []

    @property
    def final(self) -> Configuration:
        return self.steps[-1].config if self.steps else self.initial

    @property
    def M(self) -> int:
        return len(self.steps)

    def point(self, i: int) -> Configuration:
        if i < 0 or i > len(self.steps):
            raise IndexError(f"point {i} outside 0..{len(self.steps)}")
        return self.initial if i == 0 else self.steps[i - 1].config

    def record(self, st: Step) -> Configuration:
        self.steps.append(st)
        return st.config

    def extend(self, other: "Execution") -> "Execution":
        if other.initial is not self.final:
            raise ValueError("execution does not continue from this one")
        self.steps.extend(other.steps)
        return self

    def do(self, actor: Actor, choice: Optional[int] = None, hold: frozenset = frozenset()) -> Configuration:
        return self.record(apply_step(self.final, actor, choice, hold))

    def invoke(self, client: ActorId, value: Any = None) -> Configuration:
        return self.record(apply_invoke(self.final, client, value))

    def run_fair(self, frozen: Iterable[Actor] = (), stop: Optional[StopPredicate] = None, seed: int = 0,
                 hold: Iterable[ActorId] = (), budget: Optional[int] = None) -> "Execution":
        _run_fair_into(self, frozenset(frozen), stop, seed, frozenset(hold), budget)
        return self

    def deliver_all(self, channels: Iterable[Channel]) -> "Execution":
        for ch in sorted(channels, key=lambda c: c.rank):
            cfg = self.final
            if ch.src in cfg.failed or ch.dst in cfg.failed:
                continue
            while cfg.queue(ch):
                cfg = self.do(ch, 0)
        return self

    def deliver_matching(self, ch: Channel, keep: Callable[[Message], bool]) -> "Execution":
        """Deliver, in queue order, every message on ``ch`` accepted by ``keep``."""
        while True:
            q = self.final.queue(ch)
            idx = next((i for i, m in enumerate(q) if keep(m)), None)
            if idx is None:
                return self
            self.do(ch, idx)

    def trace(self) -> list[tuple[str, str]]:
        return [(str(s.actor), s.label) for s in self.steps]

    def to_jsonl(self) -> str:
        lines = []
        for i, st in enumerate(self.steps, start=1):
            cfg = st.config
            states = {str(a): digest(cfg.spec.serialize_state(v) if a.kind == SERVER else encode(v))
                      for a, v in sorted(cfg.local.items(), key=lambda kv: kv[0].rank)}
            lines.append(json.dumps({"step": i, "actor": str(st.actor), "label": st.label, "states": states},
                                    sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


def _run_fair_into(exe: Execution, frozen: frozenset, stop: Optional[StopPredicate], seed: int,
                   hold: frozenset, budget: Optional[int]) -> None:
    limit = step_budget() if budget is None else budget
    cfg = exe.final
    if stop is not None and stop(cfg):
        return
    order = cfg.system.rotation
    size = len(order)
    pos = seed % size
    idle = 0
    taken = 0
    while True:
        actor = order[pos]
        pos = (pos + 1) % size
        if actor in frozen or not is_enabled(cfg, actor, hold):
            idle += 1
            if idle >= size:
                if stop is None:
                    return
                raise NonTermination(f"no enabled actor after {taken} steps and the stop condition never held")
            continue
        idle = 0
        cfg = exe.record(apply_step(cfg, actor, None, hold))
        taken += 1
        if stop is not None and stop(cfg):
            return
        if taken >= limit:
            raise NonTermination(f"step budget of {limit} exhausted")


def run_fair(cfg: Configuration, frozen: Iterable[Actor] = (), stop: Optional[StopPredicate] = None,
             seed: int = 0, hold: Iterable[ActorId] = (), budget: Optional[int] = None) -> Execution:
    """Round-robin over live, unfrozen, enabled actors starting at a seed offset.

    With ``stop=None`` the run ends at quiescence.  Otherwise reaching
    quiescence or the step budget first raises :class:`NonTermination`.
    """
    return Execution(cfg).run_fair(frozen, stop, seed, hold, budget)


def deliver_all(cfg: Configuration, channels: Iterable[Channel]) -> Configuration:
    return Execution(cfg).deliver_all(channels).final


def snapshot_fingerprint(cfg: Configuration, servers: Sequence[int]) -> tuple[bytes, ...]:
    for n in servers:
        if server(n) in cfg.failed:
            raise FailedServerInFingerprint(f"server {n} has failed")
    return tuple(cfg.server_bytes(n) for n in servers)


class ReachableStateLedger:
    """Distinct serialized states seen per server across a family of runs."""

    def __init__(self, servers: Iterable[int]) -> None:
        self.states: dict[int, set[bytes]] = {n: set() for n in servers}

    def observe(self, cfg: Configuration) -> None:
        for n, seen in self.states.items():
            seen.add(cfg.server_bytes(n))

    def observe_execution(self, exe: Execution) -> None:
        self.observe(exe.initial)
        for st in exe.steps:
            self.observe(st.config)

    def counts(self) -> dict[int, int]:
        return {n: len(s) for n, s in self.states.items()}


def drop_log_csv(cfg: Configuration) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["step", "channel", "payload_digest"])
    for rec in cfg.drops:
        out.writerow(list(rec))
    return buf.getvalue()
