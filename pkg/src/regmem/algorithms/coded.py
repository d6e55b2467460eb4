"""Erasure-coded multi-version register in the style of CAS.

Writers run three phases: query the highest finalized tag, store one coded
symbol per server (the only value-dependent phase), then broadcast the tag as
finalized.  A server keeps the symbol of its finalized tag plus at most ``nu``
newer unfinalized symbols.  Readers learn the highest finalized tag from a
quorum, then ask every server for symbols.  Asking also finalizes the tag at
the server, so a quorum knows it once the read returns.  A server answers
with the symbol of its own finalized tag, holding the request until that
symbol arrives.  When an answer carries a newer tag the reader starts a new
round for it; ``k`` symbols with equal tags decode the value.

With ``gossip=True`` a server that learns a finalized tag from a writer also
forwards it to every other server.  Forwarded tags are not forwarded again.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from typing import Any, Optional

from ..coding import CodeParams, decode, elements_needed, elements_to_value, encode, symbol_bits, value_to_elements
from ..encoding import encode as canonical
from ..errors import InvalidParams
from ..model import WRITER, ActorId, Send, server
from .protocol import AlgorithmSpec, Phase, PhasePlan, ServerSlot, label_classifier

INITIAL_TAG = (0, 0)
FINALIZE_HASH = "finalize-hash"


def _gc(fin: tuple, versions: tuple, nu: int) -> tuple:
    """Drop versions older than ``fin`` and keep the ``nu`` newest beyond it."""
    kept = [tv for tv in versions if tv[0] >= fin]
    current = [tv for tv in kept if tv[0] == fin]
    newer = [tv for tv in kept if tv[0] > fin]
    return tuple(current + newer[-nu:]) if nu > 0 else tuple(current)


def _serve(fin: tuple, versions: tuple, pending: tuple) -> tuple[tuple, list[Send]]:
    sym = next((s for t, s in versions if t == fin), None)
    if sym is None or not pending:
        return pending, []
    return (), [Send(who, ("sym", rid, (fin, sym)), "sym") for who, rid in pending]


class CodedReader:
    def __init__(self, n_servers: int, quorum: int, code: CodeParams, width: int) -> None:
        self.n_servers = n_servers
        self.quorum = quorum
        self.code = code
        self.width = width

    def _all(self, body: Any, label: str) -> list[Send]:
        return [Send(server(i), body, label) for i in range(1, self.n_servers + 1)]

    def start(self, reader: int, op_seq: int) -> tuple[Any, list[Send]]:
        proto = ("query", op_seq, 0, frozenset(), INITIAL_TAG, ())
        return proto, self._all(("rquery", (op_seq, 0), None), "rquery")

    def _ask(self, seq: int, rnd: int, tag: tuple) -> tuple[Any, list[Send]]:
        return ("get", seq, rnd, frozenset(), tag, ()), self._all(("get", (seq, rnd), tag), "get")

    def receive(self, proto: Any, src: int, body: Any) -> tuple[Any, list[Send], Optional[tuple]]:
        stage, seq, rnd, got, best, syms = proto
        kind, rid, payload = body
        if rid != (seq, rnd):
            return proto, [], None
        if stage == "query" and kind == "rquery-ack" and src not in got:
            got = got | {src}
            best = max(best, payload)
            if len(got) < self.quorum:
                return (stage, seq, rnd, got, best, syms), [], None
            nxt, sends = self._ask(seq, rnd + 1, best)
            return nxt, sends, None
        if stage == "get" and kind == "sym" and src not in got:
            tag, sym = payload
            if tag > best:
                nxt, sends = self._ask(seq, rnd + 1, tag)
                return nxt, sends, None
            got = got | {src}
            syms = syms + ((src, sym),)
            if len(syms) < self.code.k:
                return (stage, seq, rnd, got, best, syms), [], None
            elems = decode(sorted(syms), self.code, self.width)
            return ("done", seq, rnd, got, best, syms), [], (elements_to_value(elems, self.code.m),)
        return proto, [], None


def coded_spec(n_servers: int, f: int, nu: int = 1, n_values: int = 16, *, gossip: bool = False,
               m: Optional[int] = None, mutation: Optional[str] = None) -> AlgorithmSpec:
    if not 0 <= f < n_servers:
        raise InvalidParams(f"need 0 <= f < N, got N={n_servers}, f={f}")
    if nu < 1:
        raise InvalidParams("nu must be at least 1")
    if n_values < 1:
        raise InvalidParams("the value domain must be nonempty")
    if mutation not in (None, FINALIZE_HASH):
        raise InvalidParams(f"unknown coded mutation {mutation!r}")
    k = n_servers - f
    if m is None:
        m = 4 if n_servers <= 15 else 8
    code = CodeParams(n_servers, k, m)
    width = elements_needed(n_values, m)
    quorum = n_servers - f

    @lru_cache(maxsize=None)
    def symbols(v: int) -> dict:
        return encode(value_to_elements(v, width, m), code).symbols

    def server_init(n: int) -> tuple:
        return (INITIAL_TAG, ((INITIAL_TAG, symbols(0)[n]),), ())

    def on_receive(n: int, state: tuple, src: ActorId, body: Any) -> tuple[tuple, list[Send]]:
        fin, versions, pending = state
        kind, rid, payload = body
        out: list[Send] = []
        if kind == "query":
            return state, [Send(src, ("query-ack", rid, fin), "query-ack")]
        if kind == "rquery":
            return state, [Send(src, ("rquery-ack", rid, fin), "rquery-ack")]
        if kind == "pre":
            tag, sym = payload
            if tag >= fin and all(t != tag for t, _ in versions):
                versions = _gc(fin, tuple(sorted(versions + ((tag, sym),))), nu)
            out.append(Send(src, ("pre-ack", rid, None), "pre-ack"))
        elif kind in ("fin", "gossip-fin"):
            tag = payload[0] if mutation == FINALIZE_HASH and kind == "fin" else payload
            fin = max(fin, tag)
            versions = _gc(fin, versions, nu)
            if kind == "fin":
                out.append(Send(src, ("fin-ack", rid, None), "fin-ack"))
                if gossip and src.kind == WRITER:
                    out.extend(Send(server(j), ("gossip-fin", None, tag), "gossip-fin")
                               for j in range(1, n_servers + 1) if j != n)
        elif kind == "get":
            fin = max(fin, payload)
            versions = _gc(fin, versions, nu)
            pending = pending + ((src, rid),)
        else:
            raise ValueError(f"coded server cannot handle {kind!r}")
        pending, served = _serve(fin, versions, pending)
        return (fin, versions, pending), out + served

    def fin_payload(ctx: tuple, v: int, dst: int) -> Any:
        if mutation == FINALIZE_HASH:
            return (ctx[2], hashlib.blake2b(canonical(v), digest_size=4).hexdigest())
        return ctx[2]

    def query_absorb(ctx: tuple, src: int, tag: tuple) -> tuple:
        return (ctx[0], max(ctx[1], tag), None)

    def query_finish(ctx: tuple) -> tuple:
        return (ctx[0], ctx[1], (ctx[1][0] + 1, ctx[0]))

    plan = PhasePlan(
        phases=(
            Phase("query", False, quorum, build=lambda ctx, v, dst: None,
                  absorb=query_absorb, finish=query_finish),
            Phase("pre", True, quorum, build=lambda ctx, v, dst: (ctx[2], symbols(v)[dst])),
            Phase("fin", False, quorum, build=fin_payload),
        ),
        start=lambda writer_id, seq: (writer_id, INITIAL_TAG, None),
    )
    per_version = symbol_bits(code, width)

    def payload_bits(slot: ServerSlot) -> int:
        return per_version * len(slot.state[1])

    name = "coded-gossip" if gossip else "coded"
    return AlgorithmSpec(
        name=name if mutation is None else f"{name}[{mutation}]",
        n_servers=n_servers,
        f=f,
        n_values=n_values,
        server_init=server_init,
        server_on_receive=on_receive,
        writer_plan=plan,
        reader_protocol=CodedReader(n_servers, quorum, code, width),
        classify_send=label_classifier(["pre", "sym"]),
        nu=nu,
        gossips=gossip,
        payload_bits=payload_bits,
        params={"k": k, "m": m, "width": width, "quorum": quorum, "intersecting": n_servers > 2 * f},
    )
