"""One write per value: the live servers alone must tell the values apart."""

from __future__ import annotations

from typing import Optional, Sequence

from ..algorithms.protocol import AlgorithmSpec
from ..bounds import ProductForm
from ..model import reader, writer
from ..sim import Execution, ReachableStateLedger, System, client_done, fail_servers, initial_configuration, snapshot_fingerprint
from .probes import clients_and_channels, read_after
from .report import StateFingerprint, WitnessReport, find_collisions
from .two_write import _check_live, default_live


def single_write_execution(spec: AlgorithmSpec, live: Sequence[int], v: int, seed: int = 0) -> Execution:
    """Fail the complement of ``live``, write ``v``, then let every channel drain."""
    system = System(spec, n_writers=1, n_readers=1)
    cfg = fail_servers(initial_configuration(system), set(range(1, spec.n_servers + 1)) - set(live))
    exe = Execution(cfg)
    frozen = clients_and_channels(cfg, [reader(1)])
    exe.invoke(writer(1), v)
    exe.run_fair(frozen=frozen, stop=client_done(writer(1), 1), seed=seed)
    exe.run_fair(frozen=frozen, seed=seed)
    return exe


def witness_thm1(spec: AlgorithmSpec, live: Optional[Sequence[int]] = None, values: Optional[Sequence[int]] = None,
                 seed: int = 0) -> WitnessReport:
    live = _check_live(spec, default_live(spec) if live is None else live)
    values = list(spec.values if values is None else values)
    ledger = ReachableStateLedger(live)
    fingerprints = {}
    reads_ok = True
    for v in values:
        exe = single_write_execution(spec, live, v, seed)
        ledger.observe_execution(exe)
        fingerprints[(v,)] = StateFingerprint("thm1", snapshot_fingerprint(exe.final, live))
        reads_ok &= read_after(Execution(exe.final), [writer(1)], seed) == v
    report = WitnessReport("thm1", {**spec.describe(), "live": list(live), "values": values, "seed": seed},
                           len(values), fingerprints, ledger.counts(),
                           ProductForm(len(values), 1, 0, "prod |S_n| >= V"))
    report.collisions = find_collisions(fingerprints)
    report.checks = {"read_returns_written_value": reads_ok}
    return report
