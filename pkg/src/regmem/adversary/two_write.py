"""Two consecutive writes, valency flips, and the pairwise counting witnesses.

One writer writes v1 and then v2 while the reader sits idle and only the
servers in the live set act.  Every point from the end of the first write to
the quiescent end of the run is probed with a frozen-writer read.  The first
point whose probe returns v1 followed by one that returns v2 is the flip.
Fingerprints taken at the flip must separate all ordered pairs (v1, v2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from ..algorithms.protocol import AlgorithmSpec
from ..bounds import BoundParams, bound_thm2, bound_thm3
from ..consistency import check_regular
from ..errors import HypothesisViolation, InvalidParams
from ..model import Channel, reader, server, writer
from ..sim import Configuration, Execution, ReachableStateLedger, System, client_done, fail_servers, initial_configuration
from .probes import GOSSIP_FLUSH, PLAIN, clients_and_channels, gossip_flush, read_after, valency_probe
from .report import StateFingerprint, WitnessReport, find_collisions


@dataclass
class TwoWriteExecution:
    exe: Execution
    live: tuple[int, ...]
    values: tuple
    p0: int
    pm: int
    write2_done: int


def default_live(spec: AlgorithmSpec) -> tuple[int, ...]:
    return tuple(range(1, spec.n_servers - spec.f + 1))


def _check_live(spec: AlgorithmSpec, live: Sequence[int]) -> tuple[int, ...]:
    live = tuple(sorted(live))
    if len(live) != spec.n_servers - spec.f or any(not 1 <= n <= spec.n_servers for n in live):
        raise InvalidParams(f"live set {live} must be N - f = {spec.n_servers - spec.f} servers")
    return live


def build_two_write_execution(spec: AlgorithmSpec, live: Optional[Sequence[int]] = None, v1: int = 1, v2: int = 2,
                              gossip: bool = False, seed: int = 0) -> TwoWriteExecution:
    """Fail the servers outside ``live``, write v1 to completion, then v2, then
    run to quiescence.  With ``gossip=False`` any server-to-server message
    raises :class:`HypothesisViolation`."""
    if v1 == v2:
        raise InvalidParams("the two written values must differ")
    live = _check_live(spec, default_live(spec) if live is None else live)
    system = System(spec, n_writers=1, n_readers=1)
    cfg = fail_servers(initial_configuration(system), set(range(1, spec.n_servers + 1)) - set(live))
    exe = Execution(cfg)
    frozen = clients_and_channels(cfg, [reader(1)])
    w = writer(1)
    exe.invoke(w, v1)
    exe.run_fair(frozen=frozen, stop=client_done(w, 1), seed=seed)
    p0 = exe.M
    exe.invoke(w, v2)
    exe.run_fair(frozen=frozen, stop=client_done(w, 2), seed=seed)
    done = exe.M
    exe.run_fair(frozen=frozen, seed=seed)
    if not gossip:
        for st in exe.steps:
            if st.sent is not None and st.sent.between_servers or st.dropped is not None and st.dropped.between_servers:
                raise HypothesisViolation(f"{spec.name} sends server-to-server messages ({st.label})")
    return TwoWriteExecution(exe, live, (v1, v2), p0, exe.M, done)


@dataclass
class FlipPoint:
    index: int
    found: bool
    probes: dict
    flips: list
    changed_servers: list
    changed_channels: list


def changed_servers(a: Configuration, b: Configuration) -> list[int]:
    return [n for n in a.live_servers() if a.server_bytes(n) != b.server_bytes(n)]


def changed_server_channels(a: Configuration, b: Configuration) -> list[Channel]:
    return [c for c in a.system.server_channels(a.live_servers()) if a.queue(c) != b.queue(c)]


def find_flip_point(tw: TwoWriteExecution, mode: str = PLAIN, seed: int = 0) -> FlipPoint:
    """Probe every point from p0 to pm and return the first v1 -> v2 flip.

    Without a flip (only possible for an incorrect protocol) the last step is
    used and ``found`` is False."""
    v1, v2 = tw.values
    probes = {i: valency_probe(tw.exe, i, mode, seed=seed).value for i in range(tw.p0, tw.pm + 1)}
    flips = [i for i in range(tw.p0, tw.pm) if probes[i] == v1 and probes[i + 1] == v2]
    found = bool(flips)
    idx = flips[0] if found else max(tw.pm - 1, tw.p0)
    q1, q2 = tw.exe.point(idx), tw.exe.point(min(idx + 1, tw.pm))
    return FlipPoint(idx, found, probes, flips, changed_servers(q1, q2), changed_server_channels(q1, q2))


def _states(cfg: Configuration, live: Sequence[int]) -> tuple[bytes, ...]:
    return tuple(cfg.server_bytes(n) for n in live)


def _flushed(exe: Execution, i: int) -> Configuration:
    return gossip_flush(Execution(exe.point(i))).final


def fingerprint_thm2(tw: TwoWriteExecution, flip: FlipPoint) -> StateFingerprint:
    q1 = tw.exe.point(flip.index)
    q2 = tw.exe.point(min(flip.index + 1, tw.pm))
    s = flip.changed_servers[0] if flip.changed_servers else tw.live[0]
    return StateFingerprint("thm2", _states(q1, tw.live), ((s, q2.server_bytes(s)),))


def fingerprint_thm3(tw: TwoWriteExecution, flip: FlipPoint) -> tuple[StateFingerprint, Configuration, Configuration]:
    r1 = _flushed(tw.exe, flip.index)
    r2 = _flushed(tw.exe, min(flip.index + 1, tw.pm))
    s = flip.changed_servers[0] if flip.changed_servers else tw.live[0]
    if flip.changed_channels:
        s2 = flip.changed_channels[0].dst.index
    else:
        s2 = next(n for n in tw.live if n != s) if len(tw.live) > 1 else s
    fp = StateFingerprint("thm3", _states(r1, tw.live), ((s, r2.server_bytes(s)), (s2, r2.server_bytes(s2))))
    return fp, r1, r2


def splice_read(donor: TwoWriteExecution, host: TwoWriteExecution, donor_point: int, host_point: int,
                seed: int = 0) -> dict:
    """Run the host execution to ``host_point``, transplant the donor's server
    states there, and read with the writer frozen.  Returns the read value and
    the regularity verdict of the resulting history."""
    base = host.exe.point(host_point)
    src = donor.exe.point(donor_point)
    local = dict(base.local)
    for n in host.live:
        local[server(n)] = src.local[server(n)]
    spliced = Configuration(base.system, local, base.channels, base.failed, base.frozen, base.step_count,
                            base.history, base.drops)
    ext = Execution(spliced)
    value = read_after(ext, base.system.writers, seed)
    verdict = check_regular(ext.final.history, initial=host.exe.initial.spec.initial_value)
    return {"host": list(host.values), "donor": list(donor.values), "host_point": host_point,
            "donor_point": donor_point, "returned": value, "regular": verdict.ok, "witness": verdict.witness}


def _replay_collision(runs: dict, flips: dict, a: tuple, b: tuple, seed: int) -> dict:
    """Splice the two colliding runs at their first and second flip points
    (the two cases of the counting argument) and keep the first that breaks
    regularity."""
    attempts = []
    for case, offset in (("I", 0), ("II", 1)):
        for donor, host in ((a, b), (b, a)):
            dp = min(flips[donor].index + offset, runs[donor].pm)
            hp = min(flips[host].index + offset, runs[host].pm)
            res = splice_read(runs[donor], runs[host], dp, hp, seed)
            res["case"] = case
            attempts.append(res)
            if not res["regular"]:
                return res
    return attempts[0] | {"note": "no splice produced a regularity violation"}


def _pairs(values: Sequence[int]) -> list[tuple[int, int]]:
    return [(x, y) for x, y in itertools.permutations(values, 2)]


def _witness_pairs(spec: AlgorithmSpec, theorem: str, live: Optional[Sequence[int]], values: Optional[Sequence[int]],
                   seed: int) -> WitnessReport:
    gossip = theorem == "thm3"
    mode = GOSSIP_FLUSH if gossip else PLAIN
    live = _check_live(spec, default_live(spec) if live is None else live)
    values = list(spec.values if values is None else values)
    if len(values) < 2:
        raise InvalidParams("need at least two values")
    ledger = ReachableStateLedger(live)
    runs: dict = {}
    flips: dict = {}
    fingerprints: dict = {}
    probe_sound = endpoints = local = True
    for pair in _pairs(values):
        tw = build_two_write_execution(spec, live, *pair, gossip=gossip, seed=seed)
        flip = find_flip_point(tw, mode, seed)
        runs[pair], flips[pair] = tw, flip
        ledger.observe_execution(tw.exe)
        probe_sound &= all(v in pair for v in flip.probes.values())
        endpoints &= flip.probes[tw.p0] == pair[0] and flip.probes[tw.pm] == pair[1]
        if gossip:
            fp, r1, r2 = fingerprint_thm3(tw, flip)
            ledger.observe(r1)
            ledger.observe(r2)
            local &= len(flip.changed_servers) <= 1 and len(flip.changed_channels) <= 1
        else:
            fp = fingerprint_thm2(tw, flip)
            local &= len(flip.changed_servers) <= 1
        fingerprints[pair] = fp
    p = BoundParams(spec.n_servers, spec.f, 1, len(values))
    bound = bound_thm3(p) if gossip else bound_thm2(p, enforce_hypothesis=False)
    report = WitnessReport(theorem, {**spec.describe(), "live": list(live), "values": values, "seed": seed},
                           len(values) * (len(values) - 1), fingerprints, ledger.counts(), bound.product_form)
    report.collisions = find_collisions(fingerprints)
    report.checks = {"probes_return_v1_or_v2": probe_sound, "endpoint_valencies": endpoints,
                     "flip_locality": local, "flips_found": all(f.found for f in flips.values())}
    report.details = {
        "flip_points": {f"{a}->{b}": {"index": fl.index, "p0": runs[(a, b)].p0, "pm": runs[(a, b)].pm,
                                      "all_flips": fl.flips, "changed_servers": fl.changed_servers,
                                      "changed_channels": [str(c) for c in fl.changed_channels]}
                        for (a, b), fl in sorted(flips.items())},
        "bound_notes": list(bound.notes),
    }
    if theorem == "thm2" and spec.f < 2:
        report.details["hypothesis"] = "outside stated hypothesis (f < 2)"
    if report.collisions:
        report.details["splices"] = [_replay_collision(runs, flips, a, b, seed) for a, b in report.collisions[:4]]
    return report


def witness_thm2(spec: AlgorithmSpec, live: Optional[Sequence[int]] = None, values: Optional[Sequence[int]] = None,
                 seed: int = 0) -> WitnessReport:
    return _witness_pairs(spec, "thm2", live, values, seed)


def witness_thm3(spec: AlgorithmSpec, live: Optional[Sequence[int]] = None, values: Optional[Sequence[int]] = None,
                 seed: int = 0) -> WitnessReport:
    return _witness_pairs(spec, "thm3", live, values, seed)
