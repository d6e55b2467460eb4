"""Seeded random schedules for consistency sweeps.

Each run draws an operation script (at most ``max_ops`` operations spread
over the clients, writes with distinct values) and a crash plan (at most f
servers, never clients).  At every step it picks uniformly among the enabled
actors and the clients ready to invoke their next operation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .algorithms import make_spec
from .algorithms.protocol import IDLE, AlgorithmSpec
from .consistency import Verdict, check_atomic
from .errors import NonTermination
from .model import WRITER, reader, writer
from .sim import (Configuration, Execution, System, apply_invoke, apply_step, client_done, enabled_actors,
                  fail_servers, initial_configuration)

RUN_BUDGET = 50_000


@dataclass(frozen=True)
class _Invoke:
    client: object


@dataclass(frozen=True)
class SweepConfig:
    algorithm: str = "abd"
    N: int = 3
    f: int = 1
    V: int = 16
    writers: int = 2
    readers: int = 1
    max_ops: int = 5
    seeds: tuple[int, ...] = tuple(range(1000))
    crashes: bool = True
    mutation: Optional[str] = None

    def spec(self) -> AlgorithmSpec:
        return make_spec(self.algorithm, self.N, self.f, self.V, nu=self.writers, mutation=self.mutation,
                         allow_minority=False)


@dataclass
class RunResult:
    seed: int
    history: tuple
    verdict: Verdict
    steps: int


@dataclass
class SweepReport:
    config: SweepConfig
    runs: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"algorithm": self.config.algorithm, "N": self.config.N, "f": self.config.f, "V": self.config.V,
                "writers": self.config.writers, "readers": self.config.readers, "max_ops": self.config.max_ops,
                "mutation": self.config.mutation, "runs": self.runs, "ok": self.ok,
                "violations": self.violations[:10], "violation_count": len(self.violations)}


def _script(rng: random.Random, spec: AlgorithmSpec, system: System, max_ops: int) -> dict:
    clients = list(system.writers) + list(system.readers)
    count = rng.randint(0, max_ops) if clients else 0
    pool = [v for v in spec.values if v != spec.initial_value]
    rng.shuffle(pool)
    plan: dict = {c: [] for c in clients}
    for _ in range(count):
        c = rng.choice(clients)
        if c.kind == WRITER:
            if not pool:
                continue
            plan[c].append(pool.pop())
        else:
            plan[c].append(None)
    return plan


def _ready(cfg: Configuration, client) -> bool:
    st = cfg.local[client]
    status = st.m.status if client.kind == WRITER else st.status
    return status == IDLE


def random_run(spec: AlgorithmSpec, seed: int, n_writers: int = 2, n_readers: int = 1, max_ops: int = 5,
               crashes: bool = True, checker: Callable = check_atomic) -> RunResult:
    rng = random.Random(seed)
    system = System(spec, n_writers, n_readers)
    cfg = initial_configuration(system)
    plan = _script(rng, spec, system, max_ops)
    crash_at: dict[int, int] = {}
    if crashes and spec.f:
        for n in rng.sample(range(1, spec.n_servers + 1), rng.randint(0, spec.f)):
            crash_at[n] = rng.randint(0, 40)
    steps = 0
    while True:
        due = [n for n, t in crash_at.items() if t <= steps]
        if due:
            cfg = fail_servers(cfg, due)
            for n in due:
                del crash_at[n]
        invokable = [c for c, ops in plan.items() if ops and _ready(cfg, c)]
        choices = enabled_actors(cfg) + [_Invoke(c) for c in invokable]
        if not choices:
            if any(plan.values()):
                raise NonTermination(f"seed {seed}: operations left but nothing can move")
            if not crash_at:
                break
            steps = min(crash_at.values())
            continue
        pick = rng.choice(choices)
        if isinstance(pick, _Invoke):
            client = pick.client
            cfg = apply_invoke(cfg, client, plan[client].pop(0)).config
        else:
            cfg = apply_step(cfg, pick).config
        steps += 1
        if steps > RUN_BUDGET:
            raise NonTermination(f"seed {seed}: step budget exhausted")
    return RunResult(seed, cfg.history, checker(cfg.history, initial=spec.initial_value), steps)


def sweep(config: SweepConfig, checker: Callable = check_atomic) -> SweepReport:
    spec = config.spec()
    report = SweepReport(config)
    for seed in config.seeds:
        res = random_run(spec, seed, config.writers, config.readers, config.max_ops, config.crashes, checker)
        report.runs += 1
        if not res.verdict.ok:
            report.violations.append({"seed": seed, "witness": res.verdict.witness,
                                      "history": [list(e) for e in res.history]})
    return report


def sequential_mutation_history(spec: AlgorithmSpec, values: tuple = (1, 2)) -> tuple:
    """Write each value in turn, then read, all with a fair schedule."""
    system = System(spec, 1, 1)
    exe = Execution(initial_configuration(system))
    w, r = writer(1), reader(1)
    for count, v in enumerate(values, start=1):
        exe.invoke(w, v)
        exe.run_fair(stop=client_done(w, count))
    exe.invoke(r)
    exe.run_fair(stop=client_done(r, 1))
    return exe.final.history
