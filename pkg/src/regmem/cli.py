"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a violation or collision was
found (and serialized), 2 on a configuration or environment error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from .adversary import witness_thm1, witness_thm2, witness_thm3, witness_thm4
from .algorithms import ALGORITHMS, make_spec, sum_scenario
from .bounds import BoundParams, crossover, figure1_csv, figure1_table
from .errors import AssumptionViolation, RegmemError
from .workloads import SweepConfig, sweep

OK, VIOLATION, CONFIG_ERROR = 0, 1, 2
WITNESS_ALGORITHMS = ("abd", "coded", "coded-gossip")


@dataclass
class ExperimentConfig:
    N: int = 3
    f: int = 1
    nu: int = 1
    V: Optional[int] = None
    nu_max: int = 15
    algorithm: str = "abd"
    theorem: int = 1
    mutation: Optional[str] = None
    live: Optional[list] = None
    values: Optional[list] = None
    seed: int = 0
    seeds: int = 1000
    seed_start: int = 0
    writers: int = 2
    readers: int = 1
    max_ops: int = 5
    crashes: bool = True
    expect_violation: bool = False
    out: Optional[str] = None
    step_budget: Optional[int] = None

    def validate(self, command: str) -> None:
        if self.V is None:
            self.V = 16 if command == "simulate" else 4
        if self.step_budget is not None and self.step_budget < 1:
            raise ConfigError("step_budget must be positive")
        if command == "bounds":
            BoundParams(self.N, self.f)
            if self.nu_max < 1:
                raise ConfigError("nu_max must be at least 1")
        elif command == "witness":
            if self.theorem not in (1, 2, 3, 4):
                raise ConfigError(f"theorem must be 1-4, got {self.theorem}")
            if self.algorithm not in WITNESS_ALGORITHMS:
                raise ConfigError(f"witness needs one of {', '.join(WITNESS_ALGORITHMS)}")
            BoundParams(self.N, self.f, self.nu, self.V)
            if self.V < 2:
                raise ConfigError("need at least two values")
        elif command == "appendix-a":
            if self.values is not None and (len(self.values) != 3 or not all(0 <= v < 16 for v in self.values)):
                raise ConfigError("appendix-a takes three values in 0..15")
        elif command == "simulate":
            if self.algorithm not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {self.algorithm!r}")
            if min(self.seeds, self.max_ops + 1, self.writers, self.readers + 1) < 1 or self.seed_start < 0:
                raise ConfigError("seeds, writers must be positive and max_ops, readers non-negative")
            if self.algorithm != "xor-demo" and not 0 <= self.f < self.N:
                raise ConfigError(f"need 0 <= f < N, got N={self.N}, f={self.f}")


class ConfigError(RegmemError):
    """Rejected command configuration."""


def _load(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known - {"command"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return {k: v for k, v in data.items() if k in known}


def _config(args: argparse.Namespace) -> ExperimentConfig:
    merged = _load(args.config)
    for f in fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            merged[f.name] = value
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def cmd_bounds(cfg: ExperimentConfig) -> int:
    rows = figure1_table(cfg.N, cfg.f, range(1, cfg.nu_max + 1))
    _emit(figure1_csv(rows), cfg.out)
    cross = crossover(rows)
    stream = sys.stdout if cfg.out else sys.stderr
    print(f"crossover nu={cross}" if cross is not None else "crossover none", file=stream)
    return OK


def run_witness(cfg: ExperimentConfig):
    spec = make_spec(cfg.algorithm, cfg.N, cfg.f, cfg.V, nu=cfg.nu, mutation=cfg.mutation)
    if cfg.theorem == 1:
        return witness_thm1(spec, cfg.live, seed=cfg.seed)
    if cfg.theorem == 2:
        return witness_thm2(spec, cfg.live, seed=cfg.seed)
    if cfg.theorem == 3:
        return witness_thm3(spec, cfg.live, seed=cfg.seed)
    return witness_thm4(spec, cfg.nu, seed=cfg.seed)


def cmd_witness(cfg: ExperimentConfig) -> int:
    try:
        report = run_witness(cfg)
    except AssumptionViolation as exc:
        _emit(json.dumps({"ok": False, "assumption_violation": str(exc), "config": asdict(cfg)},
                         sort_keys=True, indent=2) + "\n", cfg.out)
        return VIOLATION
    _emit(report.to_json() + "\n", cfg.out)
    return OK if report.ok else VIOLATION


def run_simulate(cfg: ExperimentConfig):
    n, f, writers = cfg.N, cfg.f, cfg.writers
    if cfg.algorithm == "xor-demo":
        n, f, writers = 2, 0, 1
    sc = SweepConfig(cfg.algorithm, n, f, cfg.V, writers, cfg.readers, cfg.max_ops,
                     tuple(range(cfg.seed_start, cfg.seed_start + cfg.seeds)), cfg.crashes, cfg.mutation)
    return sweep(sc)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    report = run_simulate(cfg)
    body = report.as_dict() | {"expect_violation": cfg.expect_violation}
    _emit(json.dumps(body, sort_keys=True, indent=2, default=str) + "\n", cfg.out)
    if cfg.expect_violation:
        return OK if not report.ok else VIOLATION
    return OK if report.ok else VIOLATION


def cmd_appendix_a(cfg: ExperimentConfig) -> int:
    v1, v2, v3 = (3, 5, 9) if cfg.values is None else cfg.values
    transcript = sum_scenario(v1, v2, v3)
    _emit("\n".join(transcript.lines()) + "\n", cfg.out)
    return OK if transcript.ok else VIOLATION


COMMANDS = {"bounds": cmd_bounds, "witness": cmd_witness, "simulate": cmd_simulate, "appendix-a": cmd_appendix_a}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regmem", description="Storage bounds and witnesses for register emulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file with parameters; flags override it")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--step-budget", dest="step_budget", type=int)

    b = sub.add_parser("bounds", help="normalized storage table (CSV)")
    common(b)
    b.add_argument("--N", type=int)
    b.add_argument("--f", type=int)
    b.add_argument("--nu-max", dest="nu_max", type=int)

    w = sub.add_parser("witness", help="run a counting witness and check injectivity and the product form")
    common(w)
    w.add_argument("--theorem", type=int, choices=(1, 2, 3, 4))
    w.add_argument("--algorithm", choices=WITNESS_ALGORITHMS)
    w.add_argument("--N", type=int)
    w.add_argument("--f", type=int)
    w.add_argument("--V", type=int, help="value domain size")
    w.add_argument("--nu", type=int, help="concurrent writers (theorem 4)")
    w.add_argument("--mutation")
    w.add_argument("--live", type=int, nargs="+", help="servers kept alive")
    w.add_argument("--seed", type=int)

    s = sub.add_parser("simulate", help="random-schedule consistency sweep")
    common(s)
    s.add_argument("--algorithm", choices=ALGORITHMS)
    s.add_argument("--N", type=int)
    s.add_argument("--f", type=int)
    s.add_argument("--V", type=int)
    s.add_argument("--mutation")
    s.add_argument("--seeds", type=int, help="number of seeds")
    s.add_argument("--seed-start", dest="seed_start", type=int)
    s.add_argument("--writers", type=int)
    s.add_argument("--readers", type=int)
    s.add_argument("--max-ops", dest="max_ops", type=int)
    s.add_argument("--no-crashes", dest="crashes", action="store_const", const=False)
    s.add_argument("--expect-violation", dest="expect_violation", action="store_const", const=True)

    a = sub.add_parser("appendix-a", help="joint-encoding recovery transcript")
    common(a)
    a.add_argument("--values", type=int, nargs=3, metavar=("V1", "V2", "V3"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CONFIG_ERROR if exc.code else OK
    try:
        cfg = _config(args)
        cfg.validate(args.command)
        if cfg.step_budget is not None:
            os.environ["REGMEM_STEP_BUDGET"] = str(cfg.step_budget)
        return COMMANDS[args.command](cfg)
    except RegmemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
