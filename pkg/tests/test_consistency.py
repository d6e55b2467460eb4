import pytest
from hypothesis import given, strategies as st

from regmem.consistency import (check_atomic, check_regular, check_weakly_regular, history_from_jsonl,
                                history_to_jsonl, operations)
from regmem.errors import MalformedHistory, SearchBudgetExceeded
from regmem.sim import Event


class H:
    """Small history builder: each call appends one event at the next point."""

    def __init__(self):
        self.events = []
        self.seq = {}

    def _pt(self):
        return len(self.events) + 1

    def inv(self, client, kind, value=None):
        n = self.seq[client] = self.seq.get(client, 0) + 1
        op = f"{client}.{n}"
        self.events.append(Event(op, client, kind, "invoke", value if kind == "write" else None, self._pt()))
        return op

    def res(self, op, value=None):
        client = op.split(".")[0]
        kind = next(e.kind for e in self.events if e.op_id == op)
        self.events.append(Event(op, client, kind, "respond", value if kind == "read" else None, self._pt()))

    def write(self, client, v):
        self.res(self.inv(client, "write", v))

    def read(self, client, v):
        self.res(self.inv(client, "read"), v)


def test_write_then_read_latest():
    h = H()
    h.write("w1", 1)
    h.read("r1", 1)
    assert check_regular(h.events).ok and check_atomic(h.events).ok
    bad = H()
    bad.write("w1", 1)
    bad.read("r1", 0)
    assert not check_regular(bad.events).ok and not check_atomic(bad.events).ok


def test_read_of_initial_value():
    h = H()
    h.read("r1", 0)
    assert check_regular(h.events).ok and check_atomic(h.events).ok
    assert check_weakly_regular(h.events).ok


def test_overlapping_write_unknown_value_rejected():
    h = H()
    h.write("w1", 1)
    w = h.inv("w1", "write", 2)
    r = h.inv("r1", "read")
    h.res(r, 3)
    h.res(w)
    v = check_regular(h.events)
    assert not v.ok and v.witness["returned"] == 3 and set(v.witness["candidates"]) == {1, 2}


def test_overlapping_write_either_value_accepted():
    for returned in (1, 2):
        h = H()
        h.write("w1", 1)
        w = h.inv("w1", "write", 2)
        r = h.inv("r1", "read")
        h.res(r, returned)
        h.res(w)
        assert check_regular(h.events).ok and check_atomic(h.events).ok


def test_sequential_history_linearizes_in_order():
    h = H()
    h.write("w1", 1)
    h.read("r1", 1)
    h.write("w2", 2)
    h.read("r1", 2)
    v = check_atomic(h.events)
    assert v.ok and v.witness == ["w1.1", "r1.1", "w2.1", "r1.2"]


def test_new_old_inversion_is_not_atomic_but_regular_reads_can_invert():
    h = H()
    w1 = h.inv("w1", "write", 1)
    h.res(w1)
    w2 = h.inv("w1", "write", 2)
    h.read("r1", 2)
    h.read("r1", 1)
    h.res(w2)
    assert check_regular(h.events).ok
    v = check_atomic(h.events)
    assert not v.ok and v.witness["read"] == "r1.2" and v.witness["candidates"] == [2]


def test_both_writes_complete_then_stale_read():
    h = H()
    h.write("w1", 1)
    h.write("w2", 2)
    h.read("r1", 2)
    h.read("r1", 1)
    assert not check_atomic(h.events).ok


def test_stale_read_after_second_write_completes():
    h = H()
    h.write("w1", 1)
    h.write("w1", 2)
    h.read("r1", 1)
    v = check_regular(h.events)
    assert not v.ok and v.witness["candidates"] == [2]


def test_incomplete_write_optional_and_incomplete_read_ignored():
    h = H()
    h.inv("w1", "write", 7)
    h.read("r1", 0)
    assert check_atomic(h.events).ok
    h2 = H()
    h2.inv("w1", "write", 7)
    h2.read("r1", 7)
    h2.inv("r1", "read")
    assert check_atomic(h2.events).ok and check_weakly_regular(h2.events).ok


def test_weak_regularity_with_pending_writes():
    for returned in (0, 1, 2):
        h = H()
        h.inv("w1", "write", 1)
        h.inv("w2", "write", 2)
        h.read("r1", returned)
        assert check_weakly_regular(h.events).ok
    h = H()
    h.inv("w1", "write", 1)
    h.read("r1", 9)
    v = check_weakly_regular(h.events)
    assert not v.ok and v.witness["returned"] == 9


def test_regularity_needs_one_writer():
    h = H()
    h.write("w1", 1)
    h.write("w2", 2)
    with pytest.raises(MalformedHistory):
        check_regular(h.events)


def test_malformed_histories():
    with pytest.raises(MalformedHistory):
        operations([Event("w1.1", "w1", "write", "respond", None, 1)])
    with pytest.raises(MalformedHistory):
        operations([Event("w1.1", "w1", "write", "invoke", 1, 2), Event("w1.1", "w1", "write", "respond", None, 2)])
    with pytest.raises(MalformedHistory):
        operations([Event("w1.1", "w1", "write", "invoke", 1, 1), Event("w1.2", "w1", "write", "invoke", 2, 2)])
    with pytest.raises(MalformedHistory):
        operations([Event("x.1", "x", "cas", "invoke", 1, 1)])
    with pytest.raises(MalformedHistory):
        operations([Event("w1.1", "w1", "write", "invoke", 1, 1), Event("w1.1", "w1", "write", "invoke", 1, 2)])


def test_search_budget():
    h = H()
    for i in range(6):
        h.write("w1", i + 1)
        h.read("r1", i + 1)
    with pytest.raises(SearchBudgetExceeded):
        check_atomic(h.events, max_ops=10)
    assert check_atomic(h.events, max_ops=12).ok


def test_jsonl_roundtrip():
    h = H()
    h.write("w1", 1)
    h.read("r1", 1)
    text = history_to_jsonl(h.events)
    assert history_from_jsonl(text) == h.events
    assert check_atomic(history_from_jsonl(text)).to_json() == check_atomic(h.events).to_json()


@st.composite
def random_histories(draw):
    """Interleaved invocations and responses by two writers and one reader,
    with reads returning arbitrary small values."""
    h = H()
    open_ops = {}
    written = iter(range(1, 100))
    for _ in range(draw(st.integers(0, 14))):
        client = draw(st.sampled_from(["w1", "w2", "r1"]))
        if client in open_ops:
            op = open_ops.pop(client)
            h.res(op, draw(st.integers(0, 4)) if client == "r1" else None)
        elif len(operations(h.events)) < 8:
            open_ops[client] = h.inv(client, "read" if client == "r1" else "write",
                                     None if client == "r1" else next(written))
    return h.events


@given(random_histories())
def test_atomic_implies_weakly_regular_implies_known_values(events):
    ops = operations(events)
    written = {o.value for o in ops if o.kind == "write"} | {0}
    if check_atomic(events).ok:
        assert check_weakly_regular(events).ok
    if check_weakly_regular(events).ok:
        assert all(o.value in written for o in ops if o.kind == "read" and o.complete)


@given(random_histories())
def test_atomic_single_writer_history_is_regular(events):
    single = [e for e in events if e.client != "w2"]
    if check_atomic(single).ok:
        assert check_regular(single).ok


@given(random_histories())
def test_atomic_witness_respects_real_time(events):
    v = check_atomic(events)
    if v.ok:
        ops = {o.op_id: o for o in operations(events)}
        pos = {op: i for i, op in enumerate(v.witness)}
        for a in pos:
            for b in pos:
                if ops[a].precedes(ops[b]):
                    assert pos[a] < pos[b]


@given(st.lists(st.tuples(st.sampled_from(["w1", "w2", "r1"]), st.integers(1, 50)), max_size=8))
def test_serial_histories_are_atomic(script):
    h, value = H(), 0
    for client, v in script:
        if client == "r1":
            h.read(client, value)
        else:
            h.write(client, v)
            value = v
    assert check_atomic(h.events).ok and check_weakly_regular(h.events).ok
