"""A deliberately inconsistent store whose servers keep field sums of values.

Both servers add every value they receive into one GF(2^m) accumulator.  The
reader reports the first server's accumulator.  The store exists to show that
bits held by a server need not belong to any single write: after v1, v2, v3
one server holds v1+v2+v3, and once v2 is added again (which cancels it in
characteristic two) the two servers differ by exactly v2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from ..coding import field
from ..model import Send, server
from .protocol import AlgorithmSpec, Phase, PhasePlan, label_classifier

N_SERVERS = 2


class SumReader:
    def start(self, reader: int, op_seq: int) -> tuple[Any, list[Send]]:
        return (op_seq,), [Send(server(1), ("query", (op_seq, 0), None), "query")]

    def receive(self, proto: Any, src: int, body: Any) -> tuple[Any, list[Send], Optional[tuple]]:
        kind, rid, payload = body
        if kind == "query-ack" and rid == (proto[0], 0):
            return proto, [], (payload,)
        return proto, [], None


def xor_demo_spec(m: int = 4) -> AlgorithmSpec:
    gf = field(m)

    def on_receive(n: int, state: int, src: Any, body: Any) -> tuple[int, list[Send]]:
        kind, rid, payload = body
        if kind == "add":
            return gf.add(state, payload), [Send(src, ("add-ack", rid, None), "add-ack")]
        if kind == "query":
            return state, [Send(src, ("query-ack", rid, state), "query-ack")]
        raise ValueError(f"sum store cannot handle {kind!r}")

    plan = PhasePlan(
        phases=(Phase("add", True, N_SERVERS, build=lambda ctx, v, dst: v),),
        start=lambda writer_id, seq: None,
    )
    return AlgorithmSpec(
        name="xor-demo",
        n_servers=N_SERVERS,
        f=0,
        n_values=gf.size,
        server_init=lambda n: 0,
        server_on_receive=on_receive,
        writer_plan=plan,
        reader_protocol=SumReader(),
        classify_send=label_classifier(["add", "query-ack"]),
        payload_bits=lambda slot: m,
        params={"m": m},
    )


@dataclass(frozen=True)
class SumTranscript:
    values: tuple[int, int, int]
    before: tuple[int, int]
    after: tuple[int, int]
    recovered: int
    bits_before: tuple[int, int]
    bits_after: tuple[int, int]

    @property
    def ok(self) -> bool:
        return self.recovered == self.values[1] and self.bits_before == self.bits_after

    def lines(self) -> list[str]:
        v1, v2, v3 = self.values
        return [
            f"values: v1={v1} v2={v2} v3={v3} (GF(16), addition is xor)",
            f"after writing v1, v2, v3: s1={self.before[0]} s2={self.before[1]} (both hold v1+v2+v3)",
            f"v2 delivered again to s1 only: s1={self.after[0]} (= v1+v3) s2={self.after[1]}",
            f"s2 - s1 = {self.recovered} (expected v2={v2})",
            f"stored bits per server: before={list(self.bits_before)} after={list(self.bits_after)}",
        ]


def sum_scenario(v1: int, v2: int, v3: int, m: int = 4) -> SumTranscript:
    """Write v1, v2, v3, then deliver a second copy of v2 to server 1 only."""
    from ..model import writer
    from ..sim import Execution, System, client_done, initial_configuration

    spec = xor_demo_spec(m)
    system = System(spec, n_writers=1, n_readers=0)
    exe = Execution(initial_configuration(system))
    w = writer(1)
    for count, v in enumerate((v1, v2, v3), start=1):
        exe.invoke(w, v)
        exe.run_fair(stop=client_done(w, count))

    def stored(cfg: Any) -> tuple[tuple[int, int], tuple[int, int]]:
        slots = [cfg.server_slot(n) for n in (1, 2)]
        return (tuple(s.state for s in slots), tuple(spec.payload_bits(s) for s in slots))

    before, bits_before = stored(exe.final)
    exe.invoke(w, v2)
    exe.do(w)
    exe.do(w)
    exe.deliver_all([c for c in system.channels_of(w) if c.src == w and c.dst == server(1)])
    after, bits_after = stored(exe.final)
    recovered = field(m).add(after[1], after[0])
    return SumTranscript((v1, v2, v3), before, after, recovered, bits_before, bits_after)


