import random

import pytest
from hypothesis import given, strategies as st

from regmem.algorithms import make_spec
from regmem.errors import ActorUnavailable, FailedServerInFingerprint, NonTermination
from regmem.model import SERVER, Channel, parse_actor, reader, server, writer
from regmem.sim import (Execution, System, apply_invoke, apply_step, client_done, drop_log_csv, enabled_actors,
                        fail_servers, freeze, initial_configuration, responses, run_fair, snapshot_fingerprint)


def fresh(name="abd", N=3, f=1, V=8, writers=1, readers=1):
    spec = make_spec(name, N, f, V, nu=writers)
    return Execution(initial_configuration(System(spec, writers, readers)))


def write_then_read(exe, v, seed=0):
    w, r = writer(1), reader(1)
    exe.invoke(w, v)
    exe.run_fair(stop=client_done(w, responses(exe.final, w) + 1), seed=seed)
    exe.invoke(r)
    exe.run_fair(stop=client_done(r, responses(exe.final, r) + 1), seed=seed)
    return exe.final.history[-1].value


@pytest.mark.parametrize("name", ["abd", "coded", "coded-gossip"])
def test_write_then_read_returns_value(name):
    exe = fresh(name)
    assert write_then_read(exe, 5) == 5
    assert write_then_read(exe, 3, seed=7) == 3


def test_initial_fingerprint_is_stable():
    a, b = fresh(), fresh()
    assert snapshot_fingerprint(a.final, [1, 2, 3]) == snapshot_fingerprint(b.final, [1, 2, 3])


def test_same_seed_same_trace():
    a, b = fresh(), fresh()
    write_then_read(a, 4, seed=3)
    write_then_read(b, 4, seed=3)
    assert a.trace() == b.trace() and a.to_jsonl() == b.to_jsonl()


def test_quiescent_run_without_stop_ends():
    exe = fresh()
    exe.run_fair()
    assert exe.M == 0


def test_stop_never_reached_raises():
    exe = fresh()
    with pytest.raises(NonTermination):
        exe.run_fair(stop=lambda cfg: False)


def test_step_budget_from_environment(monkeypatch):
    monkeypatch.setenv("REGMEM_STEP_BUDGET", "3")
    exe = fresh()
    exe.invoke(writer(1), 2)
    with pytest.raises(NonTermination):
        exe.run_fair(stop=client_done(writer(1), 1))


def test_failed_server_drops_and_logs():
    exe = fresh(N=3, f=1)
    exe.invoke(writer(1), 2)
    exe.do(writer(1))
    cfg = fail_servers(exe.final, [1])
    assert cfg.drops and "w1->s1" in drop_log_csv(cfg)
    assert all(ch.dst != server(1) for ch in cfg.channels)
    with pytest.raises(FailedServerInFingerprint):
        snapshot_fingerprint(cfg, [1])
    with pytest.raises(ActorUnavailable):
        apply_step(cfg, server(1))
    rest = run_fair(cfg, stop=client_done(writer(1), 1))
    assert responses(rest.final, writer(1)) == 1


def test_frozen_client_cannot_be_invoked():
    exe = fresh()
    cfg = exe.final
    with pytest.raises(ActorUnavailable):
        apply_invoke(freeze(cfg, [reader(1)]), reader(1))


def test_actor_names_roundtrip():
    for a in (server(2), writer(1), reader(3)):
        assert parse_actor(str(a)) == a


def idle(cfg, c):
    st_ = cfg.local[c]
    return (st_.m.status if c.kind == "writer" else st_.status) == "idle"


@given(st.integers(0, 10_000), st.sampled_from(["abd", "coded", "coded-gossip"]))
def test_one_step_changes_at_most_one_server(seed, name):
    rng = random.Random(seed)
    exe = fresh(name, N=4, f=1, writers=2)
    plan = {writer(1): [1, 3], writer(2): [2], reader(1): [None]}
    while True:
        cfg = exe.final
        choices = enabled_actors(cfg)
        ready = [c for c, ops in plan.items() if ops and idle(cfg, c)]
        if not choices and not ready:
            break
        if ready and (not choices or rng.random() < 0.2):
            c = ready[0]
            exe.invoke(c, plan[c].pop(0))
            continue
        actor = rng.choice(choices)
        before = exe.final
        after = exe.do(actor)
        changed = [n for n in range(1, 5) if before.server_bytes(n) != after.server_bytes(n)]
        assert len(changed) <= 1
        if isinstance(actor, Channel):
            if actor.dst.kind != SERVER:
                assert not changed
        elif actor.kind != SERVER:
            assert not changed
