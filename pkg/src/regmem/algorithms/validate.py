"""Check that a protocol fits the restricted writer class.

Clause 1: the writer state is (value, metadata, h) and every writer transition
treats the value as a black box.  Checked by replaying one recorded schedule
with a different value and comparing metadata after every step.

Clause 2: the writer decomposes into well-formed phases.

Clause 3(a): at most one phase is value-dependent, and the classifier agrees
with the phase flags.  Clause 3(b): every message sent outside that phase is
identical across values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import AssumptionViolation, SimulationError
from ..model import VALUE_DEPENDENT, WRITER, ActorId, writer
from ..sim import Execution, System, apply_invoke, apply_step, client_done, initial_configuration
from .protocol import AlgorithmSpec


@dataclass
class AssumptionReport:
    algorithm: str
    clauses: dict = field(default_factory=dict)
    schedules: int = 0

    @property
    def ok(self) -> bool:
        return all(v == "pass" for v in self.clauses.values())


def _check_phases(spec: AlgorithmSpec) -> None:
    phases = spec.writer_plan.phases
    if not phases:
        raise AssumptionViolation("2", "the writer has no phases")
    names = [p.name for p in phases]
    if len(set(names)) != len(names):
        raise AssumptionViolation("2", f"phase names repeat: {names}")
    for p in phases:
        targets = p.targets(spec.n_servers)
        if not targets or any(not 1 <= t <= spec.n_servers for t in targets):
            raise AssumptionViolation("2", f"phase {p.name} has destinations {targets}")
        if not 1 <= p.quorum_size <= len(targets):
            raise AssumptionViolation("2", f"phase {p.name} waits for {p.quorum_size} of {len(targets)}")


def _check_flags(spec: AlgorithmSpec) -> None:
    flagged = [p.name for p in spec.writer_plan.phases if p.value_dependent]
    if len(flagged) > 1:
        raise AssumptionViolation("3(a)", f"several value-dependent phases: {flagged}")
    for p in spec.writer_plan.phases:
        tagged = spec.classify_send(p.name) == VALUE_DEPENDENT
        if tagged != p.value_dependent:
            raise AssumptionViolation("3(a)", f"phase {p.name} is flagged {p.value_dependent} but classified {tagged}")


def _record(spec: AlgorithmSpec, values: tuple, seed: int) -> Execution:
    system = System(spec, n_writers=1, n_readers=0)
    exe = Execution(initial_configuration(system))
    w = writer(1)
    for count, v in enumerate(values, start=1):
        exe.invoke(w, v)
        exe.run_fair(stop=client_done(w, count), seed=seed)
    return exe


def _replay(spec: AlgorithmSpec, reference: Execution, values: tuple) -> None:
    cfg = initial_configuration(reference.initial.system)
    pending = list(values)
    for st in reference.steps:
        try:
            if st.label.startswith("invoke:"):
                nxt = apply_invoke(cfg, st.actor, pending.pop(0))
            else:
                nxt = apply_step(cfg, st.actor)
        except SimulationError as exc:
            raise AssumptionViolation("1", f"step {st.label} by {st.actor} not enabled for another value: {exc}")
        if nxt.label != st.label:
            raise AssumptionViolation("1", f"action {st.label} became {nxt.label} for another value")
        cfg = nxt.config
        w = writer(1)
        if spec.metadata_projection(cfg.local[w]) != spec.metadata_projection(st.config.local[w]):
            raise AssumptionViolation("1", f"writer metadata diverges after {st.label}")
        if isinstance(st.actor, ActorId) and st.actor.kind == WRITER and st.sent is not None:
            ours = cfg.queue(st.sent)[-1]
            theirs = st.config.queue(st.sent)[-1]
            if ours.tag != VALUE_DEPENDENT and ours.body != theirs.body:
                raise AssumptionViolation("3(b)", f"{ours.label} message differs across values: "
                                                  f"{theirs.body!r} vs {ours.body!r}")


def _value_pairs(spec: AlgorithmSpec) -> list[tuple[tuple, tuple]]:
    vals = [v for v in spec.values if v != spec.initial_value]
    if len(vals) < 2:
        return []
    a, b = vals[0], vals[-1]
    return [((a, b), (b, a)), ((a, a), (b, b))]


def validate_assumptions(spec: AlgorithmSpec, seeds: tuple = (0, 1, 2, 3)) -> AssumptionReport:
    """Run every clause, raising :class:`AssumptionViolation` on the first failure."""
    report = AssumptionReport(spec.name)
    _check_phases(spec)
    report.clauses["2"] = "pass"
    _check_flags(spec)
    report.clauses["3(a)"] = "pass"
    for first, second in _value_pairs(spec):
        for seed in seeds:
            _replay(spec, _record(spec, first, seed), second)
            report.schedules += 1
    report.clauses["1"] = "pass"
    report.clauses["3(b)"] = "pass"
    return report


def metadata_view(spec: AlgorithmSpec, cfg: Any, writers: Any) -> tuple:
    return tuple(spec.metadata_projection(cfg.local[w]) for w in writers)
