"""Operation histories and consistency checkers for read/write registers.

Atomicity is decided by exhaustive search over real-time-respecting orders,
so histories are kept small (``max_ops`` defaults to 10).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

from .errors import MalformedHistory, SearchBudgetExceeded
from .sim import Event

DEFAULT_MAX_OPS = 10
INFINITY = math.inf


@dataclass(frozen=True)
class Operation:
    op_id: str
    client: str
    kind: str
    value: Any
    invoke: int
    respond: float

    @property
    def complete(self) -> bool:
        return self.respond != INFINITY

    def precedes(self, other: "Operation") -> bool:
        return self.respond < other.invoke


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Any = None

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "witness": self.witness}, sort_keys=True)


def _as_event(e: Any) -> Event:
    if isinstance(e, Event):
        return e
    if isinstance(e, dict):
        return Event(e["op_id"], e["client"], e["kind"], e["phase"], e.get("value"), e["point"])
    return Event(*e)


def operations(history: Iterable[Any]) -> list[Operation]:
    """Pair invocations with responses, validating well-formedness."""
    invokes: dict[str, Event] = {}
    responds: dict[str, Event] = {}
    for raw in history:
        e = _as_event(raw)
        if e.kind not in ("write", "read"):
            raise MalformedHistory(f"unknown operation kind {e.kind!r}")
        table = invokes if e.phase == "invoke" else responds if e.phase == "respond" else None
        if table is None:
            raise MalformedHistory(f"unknown phase {e.phase!r}")
        if e.op_id in table:
            raise MalformedHistory(f"operation {e.op_id} has two {e.phase} events")
        table[e.op_id] = e
    ops = []
    for op_id, resp in responds.items():
        inv = invokes.get(op_id)
        if inv is None:
            raise MalformedHistory(f"operation {op_id} responds without being invoked")
        if resp.point <= inv.point:
            raise MalformedHistory(f"operation {op_id} responds at {resp.point}, not after {inv.point}")
        if (resp.kind, resp.client) != (inv.kind, inv.client):
            raise MalformedHistory(f"operation {op_id} changes kind or client")
    for op_id, inv in invokes.items():
        resp = responds.get(op_id)
        value = inv.value if inv.kind == "write" else (resp.value if resp else None)
        ops.append(Operation(op_id, inv.client, inv.kind, value, inv.point,
                             resp.point if resp else INFINITY))
    ops.sort(key=lambda o: (o.invoke, o.op_id))
    by_client: dict[str, Operation] = {}
    for op in ops:
        prev = by_client.get(op.client)
        if prev is not None and not prev.precedes(op):
            raise MalformedHistory(f"client {op.client} starts {op.op_id} before {prev.op_id} responded")
        by_client[op.client] = op
    return ops


def _linearize(mandatory: Sequence[Operation], optional: Sequence[Operation], initial: Any) -> Optional[list[str]]:
    ops = list(mandatory) + list(optional)
    must = frozenset(range(len(mandatory)))
    before = [frozenset(j for j, p in enumerate(ops) if p.precedes(o)) for o in ops]
    failed: set = set()

    def search(remaining: frozenset, value: Any) -> Optional[list[str]]:
        if not remaining & must:
            return []
        key = (remaining, value)
        if key in failed:
            return None
        for i in sorted(remaining, key=lambda j: (ops[j].invoke, j)):
            if before[i] & remaining:
                continue
            op = ops[i]
            if op.kind == "read" and op.value != value:
                continue
            rest = search(remaining - {i}, op.value if op.kind == "write" else value)
            if rest is not None:
                return [op.op_id] + rest
        failed.add(key)
        return None

    return search(frozenset(range(len(ops))), initial)


def _split(ops: Sequence[Operation]) -> tuple[list[Operation], list[Operation]]:
    mandatory = [o for o in ops if o.complete]
    optional = [o for o in ops if o.kind == "write" and not o.complete]
    return mandatory, optional


def _budget(count: int, max_ops: int) -> None:
    if count > max_ops:
        raise SearchBudgetExceeded(f"{count} operations exceed the search budget of {max_ops}")


def _blame(ops: Sequence[Operation], initial: Any) -> dict:
    """Find the first read whose history prefix cannot be linearized."""
    values = sorted({o.value for o in ops if o.kind == "write"} | {initial}, key=repr)
    for r in sorted((o for o in ops if o.kind == "read" and o.complete), key=lambda o: o.respond):
        prefix = [o if o.respond <= r.respond else Operation(o.op_id, o.client, o.kind, o.value, o.invoke, INFINITY)
                  for o in ops if o.invoke < r.respond]
        if _linearize(*_split(prefix), initial) is not None:
            continue
        candidates = []
        for v in values:
            trial = [Operation(o.op_id, o.client, o.kind, v, o.invoke, o.respond) if o.op_id == r.op_id else o
                     for o in prefix]
            if _linearize(*_split(trial), initial) is not None:
                candidates.append(v)
        return {"read": r.op_id, "returned": r.value, "candidates": candidates}
    return {"read": None, "returned": None, "candidates": []}


def check_atomic(history: Iterable[Any], initial: Any = 0, max_ops: int = DEFAULT_MAX_OPS) -> Verdict:
    """Linearizability.  Incomplete writes may or may not take effect;
    incomplete reads are ignored."""
    ops = [o for o in operations(history) if o.complete or o.kind == "write"]
    _budget(len(ops), max_ops)
    order = _linearize(*_split(ops), initial)
    if order is not None:
        return Verdict(True, order)
    return Verdict(False, _blame(ops, initial))


def check_regular(history: Iterable[Any], initial: Any = 0) -> Verdict:
    """Single-writer regularity: each read returns the latest write that
    completed before it started, or a write overlapping it."""
    ops = operations(history)
    writers = {o.client for o in ops if o.kind == "write"}
    if len(writers) > 1:
        raise MalformedHistory(f"regularity is defined for one writer, found {sorted(writers)}")
    writes = [o for o in ops if o.kind == "write"]
    for r in (o for o in ops if o.kind == "read" and o.complete):
        done = [w for w in writes if w.precedes(r)]
        latest = max(done, key=lambda w: w.respond).value if done else initial
        legal = [latest] + [w.value for w in writes if not w.precedes(r) and w.invoke < r.respond]
        if r.value not in legal:
            return Verdict(False, {"read": r.op_id, "returned": r.value, "candidates": legal})
    return Verdict(True, [o.op_id for o in sorted(ops, key=lambda o: (o.respond, o.invoke))])


def check_weakly_regular(history: Iterable[Any], initial: Any = 0, max_ops: int = DEFAULT_MAX_OPS) -> Verdict:
    """Each complete read, together with every complete write and some subset
    of the incomplete writes, must linearize."""
    ops = operations(history)
    complete_writes = [o for o in ops if o.kind == "write" and o.complete]
    pending = [o for o in ops if o.kind == "write" and not o.complete]
    _budget(len(complete_writes) + len(pending) + 1, max_ops)
    orders = {}
    values = sorted({o.value for o in ops if o.kind == "write"} | {initial}, key=repr)
    for r in (o for o in ops if o.kind == "read" and o.complete):
        order = _linearize(complete_writes + [r], pending, initial)
        if order is None:
            candidates = [v for v in values if _linearize(
                complete_writes + [Operation(r.op_id, r.client, "read", v, r.invoke, r.respond)], pending, initial)]
            return Verdict(False, {"read": r.op_id, "returned": r.value, "candidates": candidates})
        orders[r.op_id] = order
    return Verdict(True, orders)


def history_to_jsonl(history: Iterable[Any]) -> str:
    lines = [json.dumps(_as_event(e)._asdict(), sort_keys=True) for e in history]
    return "\n".join(lines) + ("\n" if lines else "")


def history_from_jsonl(text: str) -> list[Event]:
    return [_as_event(json.loads(line)) for line in text.splitlines() if line.strip()]
