import pytest
from hypothesis import given, settings, strategies as st

from regmem.algorithms import IGNORE_SECOND_WRITE, make_spec
from regmem.workloads import SweepConfig, random_run, sweep


def test_empty_script_is_vacuously_ok():
    report = sweep(SweepConfig("abd", 3, 1, max_ops=0, seeds=tuple(range(20))))
    assert report.ok and report.runs == 20


@pytest.mark.parametrize("name", ["abd", "coded"])
@pytest.mark.parametrize("N", [3, 4, 5])
def test_reference_algorithms_atomic_on_sample(name, N):
    assert sweep(SweepConfig(name, N, 1, seeds=tuple(range(60)))).ok


def test_mutation_found_by_sweep():
    report = sweep(SweepConfig("abd", 3, 1, mutation=IGNORE_SECOND_WRITE, seeds=tuple(range(300))))
    assert not report.ok
    witness = report.violations[0]["witness"]
    assert witness["read"] and witness["returned"] not in witness["candidates"]


def test_sum_store_flagged_inconsistent():
    report = sweep(SweepConfig("xor-demo", 2, 0, writers=1, seeds=tuple(range(100))))
    assert not report.ok


def test_runs_are_reproducible():
    spec = make_spec("coded", 4, 1, 16, nu=2, allow_minority=False)
    a, b = random_run(spec, 11), random_run(spec, 11)
    assert a.history == b.history and a.steps == b.steps


@settings(max_examples=40)
@given(st.integers(0, 2**32), st.sampled_from(["abd", "coded", "coded-gossip"]), st.integers(3, 5))
def test_any_seed_is_atomic(seed, name, N):
    spec = make_spec(name, N, 1, 16, nu=2, allow_minority=False)
    res = random_run(spec, seed)
    assert res.verdict.ok, res.history
