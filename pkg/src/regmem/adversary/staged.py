"""Staged delivery of concurrent writes and the ordered-tuple counting witness.

``nu`` writers each run until their value-dependent phase, send those
messages, and stop.  Server gossip and the value-independent writer messages
are then delivered, giving point P0.  Server states at P0 do not depend on the
written values.  From P0 the value-dependent messages are handed out in
stages: servers 1..a1 get every writer's messages, and servers a_i+1..a_{i+1}
get the messages of every writer not among the first i writers of sigma.

A restricted probe at a point holds back a set of writers (no value-dependent
sends or deliveries), runs everyone else until some write completes, then
freezes all writers and reads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..algorithms.protocol import RUNNING, AlgorithmSpec
from ..algorithms.validate import validate_assumptions
from ..bounds import BoundParams, bound_thm4
from ..errors import InvalidParams, NonTermination, SearchFailed
from ..model import VALUE_DEPENDENT, ActorId, Channel, reader, server, writer
from ..sim import (
    Configuration,
    Execution,
    ReachableStateLedger,
    System,
    enabled_actors,
    fail_servers,
    initial_configuration,
    responses,
)
from .probes import clients_and_channels, read_after
from .report import StateFingerprint, WitnessReport, find_collisions

_VALIDATED: dict[int, bool] = {}


def live_count(spec: AlgorithmSpec, nu: int) -> int:
    return spec.n_servers - spec.f + nu - 1


def _check(spec: AlgorithmSpec, values: Sequence[int]) -> int:
    nu = len(values)
    if nu < 1:
        raise InvalidParams("need at least one writer")
    if nu > spec.f + 1:
        raise InvalidParams(f"nu={nu} exceeds f+1={spec.f + 1}")
    if len(set(values)) != nu or spec.initial_value in values:
        raise InvalidParams(f"values {values} must be distinct and differ from the initial value")
    if id(spec) not in _VALIDATED:
        validate_assumptions(spec)
        _VALIDATED[id(spec)] = True
    return live_count(spec, nu)


def _in_value_phase(spec: AlgorithmSpec, w: ActorId):
    def stop(cfg: Configuration) -> bool:
        st = cfg.local[w]
        if responses(cfg, w) >= 1:
            return True
        return st.m.status == RUNNING and spec.writer_plan.phases[st.m.phase].value_dependent
    return stop


def build_alpha0(spec: AlgorithmSpec, values: Sequence[int], seed: int = 0) -> Execution:
    """The common prefix: every writer stops right after its value-dependent
    sends, then server gossip and value-independent writer messages drain."""
    live = _check(spec, values)
    nu = len(values)
    system = System(spec, n_writers=nu, n_readers=1)
    cfg = fail_servers(initial_configuration(system), range(live + 1, spec.n_servers + 1))
    exe = Execution(cfg)
    for i in range(1, nu + 1):
        w = writer(i)
        others = [writer(j) for j in range(1, nu + 1) if j != i] + [reader(1)]
        exe.invoke(w, values[i - 1])
        exe.run_fair(frozen=clients_and_channels(cfg, others), stop=_in_value_phase(spec, w), seed=seed)
        while exe.final.local[w].m.status == RUNNING and exe.final.local[w].m.pending:
            exe.do(w)
    exe.deliver_all(system.server_channels(range(1, live + 1)))
    for w in system.writers:
        for ch in system.channels_of(w):
            if ch.src == w and ch.dst.index <= live:
                exe.deliver_matching(ch, lambda m: m.tag != VALUE_DEPENDENT)
    return exe


@dataclass
class StagedExecution:
    exe: Execution
    sigma: tuple[int, ...]
    thresholds: tuple[int, ...]
    points: list[int]
    live: int

    def point(self, i: int) -> Configuration:
        return self.exe.point(self.points[i])


def _deliver_from(exe: Execution, writers: Iterable[int], servers: Iterable[int]) -> None:
    for n in servers:
        for j in writers:
            exe.deliver_all([Channel(writer(j), server(n))])


def stage(alpha0: Execution, sigma: Sequence[int], thresholds: Sequence[int]) -> StagedExecution:
    cfg = alpha0.final
    nu = len(cfg.system.writers)
    live = len(cfg.live_servers())
    sigma, thresholds = tuple(sigma), tuple(thresholds)
    if sorted(sigma) != list(range(1, nu + 1)):
        raise InvalidParams(f"{sigma} is not a permutation of 1..{nu}")
    if len(thresholds) != nu or list(thresholds) != sorted(thresholds) or thresholds[0] < 0 or thresholds[-1] > live:
        raise InvalidParams(f"thresholds {thresholds} must be nondecreasing within 0..{live}")
    exe = Execution(alpha0.initial)
    exe.steps = list(alpha0.steps)
    points = [exe.M]
    _deliver_from(exe, range(1, nu + 1), range(1, thresholds[0] + 1))
    points.append(exe.M)
    for i in range(1, nu):
        rest = [j for j in range(1, nu + 1) if j not in sigma[:i]]
        _deliver_from(exe, rest, range(thresholds[i - 1] + 1, thresholds[i] + 1))
        points.append(exe.M)
    return StagedExecution(exe, sigma, thresholds, points, live)


def build_staged_execution(spec: AlgorithmSpec, values: Sequence[int], sigma: Sequence[int],
                           thresholds: Sequence[int], seed: int = 0) -> StagedExecution:
    return stage(build_alpha0(spec, values, seed), sigma, thresholds)


def _quiescent(cfg: Configuration, frozen: frozenset, hold: frozenset) -> bool:
    return not [a for a in enabled_actors(cfg, hold) if a not in frozen]


def restricted_probe(cfg: Configuration, hold: Iterable[int], seed: int = 0) -> Optional[int]:
    """Let the non-held writers and the servers run until a write completes
    (or nothing can move), then freeze every writer and read."""
    return restricted_probe_run(cfg, hold, seed)[0]


def restricted_probe_run(cfg: Configuration, hold: Iterable[int], seed: int = 0) -> tuple[Optional[int], Execution]:
    """:func:`restricted_probe` that also returns the probe's extension."""
    held = frozenset(writer(j) for j in hold)
    exe = Execution(cfg)
    frozen = frozenset(clients_and_channels(cfg, [reader(1)]))
    before = responses(cfg, kind="write")
    try:
        exe.run_fair(frozen=frozen, hold=held, seed=seed,
                     stop=lambda c: responses(c, kind="write") > before)
    except NonTermination:
        if not _quiescent(exe.final, frozen, held):
            raise
    try:
        return read_after(exe, cfg.system.writers, seed), exe
    except NonTermination:
        return None, exe


@dataclass
class Lemma2Result:
    sigma: tuple[int, ...]
    thresholds: tuple[int, ...]
    conditions: dict
    memberships: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"sigma": list(self.sigma), "a": list(self.thresholds), "conditions": self.conditions,
                "memberships": self.memberships}


def _decremented(a: Sequence[int], i: int) -> list[int]:
    return [max(x - 1, 0) for x in a[: i - 1]]


def _point(alpha0: Execution, sigma: Sequence[int], thresholds: Sequence[int], i: int) -> Configuration:
    return stage(alpha0, sigma, thresholds).point(i)


def lemma2_search(spec: AlgorithmSpec, values: Sequence[int], seed: int = 0,
                  alpha0: Optional[Execution] = None) -> Lemma2Result:
    """Choose thresholds and an order greedily: a_i is the smallest threshold
    at which some remaining writer j has its value read back while writer j
    and the already chosen writers are held; sigma(i) is the smallest such
    value.  Conditions of the resulting tuple are reported, not asserted."""
    live = _check(spec, values)
    nu = len(values)
    alpha0 = alpha0 or build_alpha0(spec, values, seed)
    sigma: list[int] = []
    a: list[int] = []
    memberships = []
    for i in range(1, nu + 1):
        remaining = [j for j in range(1, nu + 1) if j not in sigma]
        chosen = None
        for abar in range(a[-1] if a else 0, live + 1):
            prefix = _decremented(a, i) + [abar]
            thresholds = prefix + [abar] * (nu - i)
            cfg = _point(alpha0, sigma + remaining, thresholds, i)
            members = []
            for j in remaining:
                got = restricted_probe(cfg, set(sigma) | {j}, seed)
                memberships.append({"stage": i, "a": abar, "writer": j, "returned": got,
                                    "member": got == values[j - 1]})
                if got == values[j - 1]:
                    members.append(j)
            if members:
                chosen = (abar, min(members, key=lambda j: values[j - 1]))
                break
        if chosen is None:
            raise SearchFailed(f"no threshold admits a returnable value at stage {i}")
        a.append(chosen[0])
        sigma.append(chosen[1])
    conditions = _conditions(alpha0, values, tuple(sigma), tuple(a), live, seed)
    return Lemma2Result(tuple(sigma), tuple(a), conditions, memberships)


def _conditions(alpha0: Execution, values: Sequence[int], sigma: tuple, a: tuple, live: int, seed: int) -> dict:
    nu = len(values)
    out = {
        "a1_positive": a[0] >= 1,
        "strictly_increasing": all(x < y for x, y in zip(a, a[1:])),
        "within_range": a[-1] <= live,
        "i_valent": True,
        "ii_not_earlier": True,
        "iii_order": True,
    }
    for i in range(1, nu + 1):
        thresholds = _decremented(a, i) + list(a[i - 1:])
        if thresholds != sorted(thresholds):
            thresholds = sorted(thresholds)
        cfg = _point(alpha0, sigma, thresholds, i)
        got = restricted_probe(cfg, sigma[:i], seed)
        out["i_valent"] &= got == values[sigma[i - 1] - 1]
        out["ii_not_earlier"] &= got not in [values[sigma[j] - 1] for j in range(i - 1)]
        for j in range(i, nu):
            other = sigma[j]
            if restricted_probe(cfg, set(sigma[: i - 1]) | {other}, seed) == values[other - 1]:
                out["iii_order"] &= values[sigma[i - 1] - 1] < values[other - 1]
    return out


def fingerprint_thm4(staged: StagedExecution) -> StateFingerprint:
    cfg = staged.point(len(staged.sigma))
    states = tuple(cfg.server_bytes(n) for n in range(1, staged.live + 1))
    return StateFingerprint("thm4", states, labels=(staged.sigma, staged.thresholds))


def _writer_view(cfg: Configuration) -> tuple:
    spec = cfg.spec
    return tuple(spec.metadata_projection(cfg.local[w]) for w in cfg.system.writers)


def _server_side_channels(cfg: Configuration) -> tuple:
    return tuple(cfg.channel_bytes(c) for c in cfg.system.channels if c.src.kind == "server")


def metadata_invariance(spec: AlgorithmSpec, values: Sequence[int], other: Sequence[int],
                        sigma: Optional[Sequence[int]] = None, thresholds: Optional[Sequence[int]] = None,
                        seed: int = 0) -> dict:
    """Compare two value vectors under the same construction, byte for byte."""
    first, second = build_alpha0(spec, values, seed), build_alpha0(spec, other, seed)
    live = live_count(spec, len(values))
    nu = len(values)
    sigma = tuple(sigma or range(1, nu + 1))
    p0a, p0b = first.final, second.final
    checks = {
        "same_schedule": first.trace() == second.trace(),
        "p0_servers": all(p0a.server_bytes(n) == p0b.server_bytes(n) for n in range(1, live + 1)),
        "p0_server_channels": _server_side_channels(p0a) == _server_side_channels(p0b),
        "p0_writer_metadata": _writer_view(p0a) == _writer_view(p0b),
    }
    grid = [tuple(thresholds)] if thresholds is not None else \
        [t for t in itertools.combinations_with_replacement(range(live + 1), nu)]
    staged_ok = True
    for t in grid:
        sa, sb = stage(first, sigma, t), stage(second, sigma, t)
        for i in range(nu + 1):
            ca, cb = sa.point(i), sb.point(i)
            staged_ok &= _writer_view(ca) == _writer_view(cb) == _writer_view(p0a)
            staged_ok &= _server_side_channels(ca) == _server_side_channels(cb)
    checks["staged_metadata"] = staged_ok
    return checks


def value_tuples(spec: AlgorithmSpec, nu: int, values: Optional[Sequence[int]] = None) -> list[tuple[int, ...]]:
    pool = [v for v in (spec.values if values is None else values) if v != spec.initial_value]
    return list(itertools.permutations(pool, nu))


def witness_thm4(spec: AlgorithmSpec, nu: int, values: Optional[Sequence[int]] = None,
                 seed: int = 0) -> WitnessReport:
    tuples = value_tuples(spec, nu, values)
    live = live_count(spec, nu)
    ledger = ReachableStateLedger(range(1, live + 1))
    fingerprints = {}
    searches = {}
    conditions: dict = {}
    for vec in tuples:
        alpha0 = build_alpha0(spec, vec, seed)
        result = lemma2_search(spec, vec, seed, alpha0)
        staged = stage(alpha0, result.sigma, result.thresholds)
        ledger.observe_execution(staged.exe)
        fingerprints[vec] = fingerprint_thm4(staged)
        searches["/".join(map(str, vec))] = {"sigma": list(result.sigma), "a": list(result.thresholds),
                                            "conditions": result.conditions}
        for k, v in result.conditions.items():
            conditions[k] = conditions.get(k, True) and v
    if len(tuples) >= 2:
        invariance = metadata_invariance(spec, tuples[0], tuples[-1], seed=seed)
    else:
        invariance = {}
    p = BoundParams(spec.n_servers, spec.f, nu, len(spec.values))
    bound = bound_thm4(p)
    report = WitnessReport("thm4", {**spec.describe(), "writers": nu, "live": list(range(1, live + 1)),
                                    "seed": seed}, len(tuples), fingerprints, ledger.counts(), bound.product_form)
    report.collisions = find_collisions(fingerprints)
    report.checks = {f"thresholds_{k}": v for k, v in conditions.items()}
    report.checks.update({f"invariance_{k}": v for k, v in invariance.items()})
    report.details = {"searches": searches, "bound_notes": list(bound.notes),
                      "ordered_tuples": len(tuples), "binomial_count": math.comb(len(spec.values) - 1, nu)}
    return report
