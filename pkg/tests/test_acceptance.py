"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line with the
checks that decided it; run ``pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``."""

from __future__ import annotations

import contextlib
import itertools
import json
import sys
import time
from pathlib import Path

import pytest

from regmem.adversary import metadata_invariance, witness_thm1, witness_thm2, witness_thm3, witness_thm4
from regmem.adversary.staged import value_tuples
from regmem.algorithms import IGNORE_SECOND_WRITE, make_spec, sum_scenario
from regmem.algorithms.validate import validate_assumptions
from regmem.bounds import crossover, figure1_csv, figure1_table
from regmem.cli import main
from regmem.coding import CodeParams, ambiguity_count, decode, encode
from regmem.consistency import check_atomic
from regmem.workloads import SweepConfig, sequential_mutation_history, sweep

GOLDEN = Path(__file__).parent / "data" / "figure1_N21_f10.csv"


@pytest.fixture
def say(request):
    capsys = request.getfixturevalue("capsys")

    def emit(number: int, title: str, checks: dict, elapsed: float, limit: float) -> None:
        checks = dict(checks)
        checks[f"runtime<{limit:g}s"] = elapsed < limit
        failed = [k for k, v in checks.items() if not v]
        status = "PASS" if not failed else "FAIL"
        detail = f"{elapsed:.2f}s" + (f"; failed: {', '.join(failed)}" if failed else "")
        with capsys.disabled():
            print(f"\n{status} criterion {number}: {title} ({detail})")
        assert not failed, failed

    return emit


def test_criterion_01_storage_table(say):
    t = time.perf_counter()
    rows = figure1_table(21, 10, range(1, 16))
    checks = {
        "golden_bytes": figure1_csv(rows) == GOLDEN.read_text(),
        "crossover_6": crossover(rows) == 6,
    }
    say(1, "storage table N=21 f=10 matches the golden CSV", checks, time.perf_counter() - t, 1)


def test_criterion_02_single_write_witness(say):
    checks = {}
    slowest = 0.0
    for name, N, f, V in itertools.product(["abd", "coded"], [3, 4], [1, 2], [4, 8, 16]):
        if f >= N:
            continue
        t = time.perf_counter()
        r = witness_thm1(make_spec(name, N, f, V))
        slowest = max(slowest, time.perf_counter() - t)
        checks[f"{name}-N{N}-f{f}-V{V}"] = r.injective and r.distinct == V and r.product_holds and r.ok
    say(2, f"single-write fingerprints injective, product >= |V| ({len(checks)} configs, slowest shown)",
        checks, slowest, 10)


def test_criterion_03_two_write_witness(say):
    t = time.perf_counter()
    checks = {}
    for V in (3, 4):
        r = witness_thm2(make_spec("abd", 4, 2, V))
        checks[f"V{V}_injective"] = r.injective and r.distinct == V * (V - 1)
        checks[f"V{V}_product"] = r.product_holds
        checks[f"V{V}_probes_v1_or_v2"] = r.checks["probes_return_v1_or_v2"]
        checks[f"V{V}_endpoints"] = r.checks["endpoint_valencies"]
    say(3, "two-write fingerprints for ABD N=4 f=2", checks, time.perf_counter() - t, 60)


def test_criterion_04_gossip_witness(say):
    t = time.perf_counter()
    r = witness_thm3(make_spec("coded-gossip", 4, 2, 3))
    checks = {
        "injective_6": r.injective and r.distinct == 6,
        "product": r.product_holds,
        "flip_locality": r.checks["flip_locality"],
        "flips_found": r.checks["flips_found"],
    }
    say(4, "gossiping coded register, two-write fingerprints after flush", checks, time.perf_counter() - t, 120)


def test_criterion_05_concurrent_write_witness(say):
    t = time.perf_counter()
    checks = {}
    for name in ("abd", "coded"):
        r = witness_thm4(make_spec(name, 4, 2, 4, nu=2), 2)
        a = [s["a"] for s in r.details["searches"].values()]
        checks[f"{name}_a1_positive"] = all(x[0] >= 1 for x in a)
        checks[f"{name}_a2_gt_a1"] = all(x[1] > x[0] for x in a)
        checks[f"{name}_injective_6"] = r.injective and r.distinct == 6
        checks[f"{name}_product"] = r.product_holds
    say(5, "concurrent-write staged fingerprints, nu=2", checks, time.perf_counter() - t, 300)


def test_criterion_06_consistency_sweeps(say):
    t = time.perf_counter()
    checks = {}
    for name, N in itertools.product(["abd", "coded"], [3, 4, 5]):
        checks[f"{name}-N{N}-1000"] = sweep(SweepConfig(name, N, 1, seeds=tuple(range(1000)))).ok
    mutated = make_spec("abd", 3, 1, 8, mutation=IGNORE_SECOND_WRITE)
    verdict = check_atomic(sequential_mutation_history(mutated, (1, 2)))
    checks["mutation_not_linearizable"] = not verdict.ok and verdict.witness["read"] is not None
    w = witness_thm2(make_spec("abd", 4, 2, 3, mutation=IGNORE_SECOND_WRITE))
    checks["mutation_collision"] = bool(w.collisions)
    checks["mutation_splice_violation"] = any(not s["regular"] for s in w.details.get("splices", []))
    say(6, "atomicity over 6000 random schedules; mutated writer caught", checks, time.perf_counter() - t, 600)


def test_criterion_07_mds(say):
    t = time.perf_counter()
    roundtrip = ambiguity = True
    for n in range(1, 7):
        for k in range(1, n + 1):
            p = CodeParams(n, k)
            value = tuple((5 * i + 1) % 16 for i in range(2 * k))
            cw = encode(value, p)
            for subset in itertools.combinations(range(1, n + 1), k):
                roundtrip &= decode([(i, cw.symbols[i]) for i in subset], p, len(value)) == value
            for subset in itertools.combinations(range(1, n + 1), k - 1):
                pairs = [(i, cw.symbols[i]) for i in subset]
                ambiguity &= ambiguity_count(pairs, p, stripes=2) == 16 ** 2
    say(7, "MDS roundtrip and k-1 ambiguity over GF(16), n<=6",
        {"roundtrip": roundtrip, "ambiguity": ambiguity}, time.perf_counter() - t, 60)


def test_criterion_08_assumptions_and_invariance(say):
    t = time.perf_counter()
    checks = {}
    for name in ("abd", "coded"):
        checks[f"{name}_assumptions"] = validate_assumptions(make_spec(name, 4, 2, 4)).ok
        spec = make_spec(name, 4, 2, 4, nu=2)
        tuples = value_tuples(spec, 2)
        for a, b in [(tuples[0], tuples[-1]), (tuples[1], tuples[2])]:
            for k, v in metadata_invariance(spec, a, b).items():
                checks[f"{name}_{k}"] = checks.get(f"{name}_{k}", True) and v
    say(8, "writer assumptions hold; metadata identical across value vectors", checks, time.perf_counter() - t, 120)


def test_criterion_09_sum_store(say):
    t = time.perf_counter()
    recovered = constant = True
    for v1, v2, v3 in itertools.product(range(16), repeat=3):
        tr = sum_scenario(v1, v2, v3)
        recovered &= tr.recovered == v2
        constant &= tr.bits_before == tr.bits_after
    say(9, "joint-encoding subtraction recovers v2 for all 16^3 triples",
        {"recovered": recovered, "size_constant": constant}, time.perf_counter() - t, 120)


def _run_cli(argv: list) -> tuple[int, str]:
    import io
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = main(argv)
    return code, buf.getvalue()


def test_criterion_10_determinism(say):
    t = time.perf_counter()
    commands = {
        "thm1": ["witness", "--theorem", "1", "--algorithm", "coded", "--N", "4", "--f", "1", "--V", "8"],
        "thm2": ["witness", "--theorem", "2", "--algorithm", "abd", "--N", "4", "--f", "2", "--V", "3"],
        "thm3": ["witness", "--theorem", "3", "--algorithm", "coded-gossip", "--N", "4", "--f", "2", "--V", "3"],
        "thm4": ["witness", "--theorem", "4", "--algorithm", "coded", "--N", "4", "--f", "2", "--V", "4", "--nu", "2"],
        "simulate": ["simulate", "--algorithm", "abd", "--N", "4", "--seeds", "100"],
    }
    checks = {}
    for label, argv in commands.items():
        first, second = _run_cli(argv), _run_cli(argv)
        checks[label] = first == second and bool(first[1]) and json.loads(first[1]) is not None
    say(10, "repeated commands give byte-identical reports", checks, time.perf_counter() - t, 120)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
