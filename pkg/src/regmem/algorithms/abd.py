"""Multi-writer ABD replication with (counter, writer id) tags.

Writers query a quorum for the highest tag, then store (tag, value) at a
quorum.  Readers query a quorum for (tag, value), write the maximum back, and
return its value.  Quorums have N - f members, which intersect when N > 2f.
"""

from __future__ import annotations

import math
from typing import Any, Optional

from ..errors import InvalidParams
from ..model import WRITER, ActorId, Send, server
from .protocol import AlgorithmSpec, Phase, PhasePlan, ServerSlot, label_classifier

INITIAL_TAG = (0, 0)
IGNORE_SECOND_WRITE = "ignore-second-write"


def _query_absorb(ctx: tuple, src: int, tag: tuple) -> tuple:
    writer_id, best, _ = ctx
    return (writer_id, max(best, tag), None)


def _query_finish(ctx: tuple) -> tuple:
    writer_id, best, _ = ctx
    return (writer_id, best, (best[0] + 1, writer_id))


class ABDReader:
    def __init__(self, n_servers: int, quorum: int) -> None:
        self.n_servers = n_servers
        self.quorum = quorum

    def _all(self, body: Any, label: str) -> list[Send]:
        return [Send(server(i), body, label) for i in range(1, self.n_servers + 1)]

    def start(self, reader: int, op_seq: int) -> tuple[Any, list[Send]]:
        proto = ("query", op_seq, frozenset(), None)
        return proto, self._all(("query", (op_seq, 0), None), "query")

    def receive(self, proto: Any, src: int, body: Any) -> tuple[Any, list[Send], Optional[tuple]]:
        stage, seq, got, best = proto
        kind, rid, payload = body
        if stage == "query" and kind == "query-ack" and rid == (seq, 0) and src not in got:
            best = payload if best is None or payload[0] > best[0] else best
            got = got | {src}
            if len(got) < self.quorum:
                return (stage, seq, got, best), [], None
            return ("writeback", seq, frozenset(), best), self._all(("store", (seq, 1), best), "store"), None
        if stage == "writeback" and kind == "store-ack" and rid == (seq, 1) and src not in got:
            got = got | {src}
            if len(got) < self.quorum:
                return (stage, seq, got, best), [], None
            return ("done", seq, got, best), [], (best[1],)
        return proto, [], None


def abd_spec(n_servers: int, f: int, n_values: int, *, allow_minority: bool = False,
             mutation: Optional[str] = None) -> AlgorithmSpec:
    """Build the ABD protocol description.

    ``allow_minority`` admits N <= 2f.  Quorums then need not intersect, which
    is only sound for executions confined to one set of N - f live servers.
    """
    if not 0 <= f < n_servers:
        raise InvalidParams(f"need 0 <= f < N, got N={n_servers}, f={f}")
    if n_servers <= 2 * f and not allow_minority:
        raise InvalidParams(f"ABD needs N > 2f for intersecting quorums, got N={n_servers}, f={f}")
    if n_values < 1:
        raise InvalidParams("the value domain must be nonempty")
    if mutation not in (None, IGNORE_SECOND_WRITE):
        raise InvalidParams(f"unknown ABD mutation {mutation!r}")
    quorum = n_servers - f

    def server_init(n: int) -> tuple:
        return (INITIAL_TAG, 0, 0) if mutation else (INITIAL_TAG, 0)

    def on_receive(n: int, state: tuple, src: ActorId, body: Any) -> tuple[tuple, list[Send]]:
        kind, rid, payload = body
        tag, value = state[0], state[1]
        if kind == "query":
            if src.kind == WRITER:
                return state, [Send(src, ("query-ack", rid, tag), "query-ack")]
            return state, [Send(src, ("query-ack", rid, (tag, value)), "query-ack-value")]
        if kind == "store":
            new_tag, new_value = payload
            if new_tag > tag:
                if mutation is None:
                    state = (new_tag, new_value)
                else:
                    kept = new_value if state[2] == 0 else value
                    state = (new_tag, kept, state[2] + 1)
            return state, [Send(src, ("store-ack", rid, None), "store-ack")]
        raise ValueError(f"ABD server cannot handle {kind!r}")

    plan = PhasePlan(
        phases=(
            Phase("query", False, quorum, build=lambda ctx, v, dst: None,
                  absorb=_query_absorb, finish=_query_finish),
            Phase("store", True, quorum, build=lambda ctx, v, dst: (ctx[2], v)),
        ),
        start=lambda writer_id, seq: (writer_id, INITIAL_TAG, None),
    )
    value_bits = max(1, math.ceil(math.log2(n_values))) if n_values > 1 else 0

    def payload_bits(slot: ServerSlot) -> int:
        return value_bits

    return AlgorithmSpec(
        name="abd" if mutation is None else f"abd[{mutation}]",
        n_servers=n_servers,
        f=f,
        n_values=n_values,
        server_init=server_init,
        server_on_receive=on_receive,
        writer_plan=plan,
        reader_protocol=ABDReader(n_servers, quorum),
        classify_send=label_classifier(["store", "query-ack-value"]),
        payload_bits=payload_bits,
        params={"quorum": quorum, "intersecting": n_servers > 2 * f},
    )
