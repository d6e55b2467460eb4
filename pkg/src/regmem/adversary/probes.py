"""Read probes: freeze the writers, start one read, and see what it returns."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from ..encoding import digest, encode
from ..model import ActorId, reader
from ..sim import Configuration, Execution, client_done, responses

PLAIN = "plain"
GOSSIP_FLUSH = "gossip_flush"
RESTRICTED = "restricted"


@dataclass(frozen=True)
class ValencyProbeResult:
    value: object
    mode: str
    frozen: tuple[str, ...]
    trace_digest: str
    extension: Execution

    def __repr__(self) -> str:
        return f"ValencyProbeResult(value={self.value!r}, mode={self.mode!r}, frozen={self.frozen})"


def clients_and_channels(cfg: Configuration, clients: Iterable[ActorId]) -> list:
    out: list = []
    for c in clients:
        out.append(c)
        out.extend(cfg.system.channels_of(c))
    return out


def last_read(cfg: Configuration, who: ActorId) -> object:
    for e in reversed(cfg.history):
        if e.client == str(who) and e.kind == "read" and e.phase == "respond":
            return e.value
    return None


def gossip_flush(exe: Execution) -> Execution:
    """Drain every channel between live servers in channel order."""
    cfg = exe.final
    return exe.deliver_all(cfg.system.server_channels(cfg.live_servers()))


def read_after(exe: Execution, frozen_clients: Iterable[ActorId], seed: int = 0,
               who: Optional[ActorId] = None) -> object:
    """Freeze the given clients with their channels, run one read to completion."""
    who = who or reader(1)
    cfg = exe.final
    frozen = clients_and_channels(cfg, frozen_clients)
    count = responses(cfg, who) + 1
    exe.invoke(who)
    exe.run_fair(frozen=frozen, stop=client_done(who, count), seed=seed)
    return last_read(exe.final, who)


def valency_probe(exe: Execution, i: int, mode: str = PLAIN,
                  frozen_clients: Optional[Iterable[ActorId]] = None, seed: int = 0) -> ValencyProbeResult:
    """Probe point ``i``: optionally flush server gossip, then read with the
    writers frozen."""
    cfg = exe.point(i)
    ext = Execution(cfg)
    if mode == GOSSIP_FLUSH:
        gossip_flush(ext)
    elif mode != PLAIN:
        raise ValueError(f"unknown probe mode {mode!r}")
    frozen = tuple(cfg.system.writers if frozen_clients is None else frozen_clients)
    value = read_after(ext, frozen, seed)
    return ValencyProbeResult(value, mode, tuple(str(c) for c in frozen), digest(encode(ext.trace())), ext)
