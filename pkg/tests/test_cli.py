import json
from pathlib import Path

import pytest

from regmem.cli import main

GOLDEN = Path(__file__).parent / "data" / "figure1_N21_f10.csv"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bounds_to_file(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    code, stdout, _ = run(capsys, "bounds", "--N", "21", "--f", "10", "--nu-max", "15", "--out", str(out))
    assert code == 0 and out.read_bytes() == GOLDEN.read_bytes()
    assert "crossover nu=6" in stdout


def test_bounds_stdout_keeps_csv_clean(capsys):
    code, stdout, err = run(capsys, "bounds", "--N", "21", "--f", "10")
    assert code == 0 and stdout == GOLDEN.read_text() and "crossover nu=6" in err


@pytest.mark.parametrize("argv", [["bounds", "--N", "3", "--f", "3"], ["witness", "--N", "2", "--f", "0"],
                                  ["witness", "--theorem", "9"], ["simulate", "--seeds", "0"],
                                  ["appendix-a", "--values", "1", "2", "99"], ["nonsense"]])
def test_config_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_witness_single_write_passes(capsys):
    code, stdout, _ = run(capsys, "witness", "--theorem", "1", "--algorithm", "abd", "--N", "3", "--f", "1", "--V", "4")
    report = json.loads(stdout)
    assert code == 0 and report["ok"] and report["distinct_fingerprints"] == 4


def test_witness_mutation_exits_1_with_collisions(capsys):
    code, stdout, _ = run(capsys, "witness", "--theorem", "2", "--algorithm", "abd", "--N", "4", "--f", "2", "--V", "3",
                          "--mutation", "ignore-second-write")
    assert code == 1 and json.loads(stdout)["collisions"]


def test_witness_gossip_under_no_gossip_theorem_exits_2(capsys):
    code, _, err = run(capsys, "witness", "--theorem", "2", "--algorithm", "coded-gossip", "--N", "4", "--f", "2",
                       "--V", "3")
    assert code == 2 and "server-to-server" in err


def test_witness_assumption_violation_exits_1(capsys):
    code, stdout, _ = run(capsys, "witness", "--theorem", "4", "--algorithm", "coded", "--N", "4", "--f", "2",
                          "--V", "4", "--nu", "2", "--mutation", "finalize-hash")
    assert code == 1 and "3(b)" in json.loads(stdout)["assumption_violation"]


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"theorem": 1, "algorithm": "abd", "N": 3, "f": 1, "V": 8}))
    code, stdout, _ = run(capsys, "witness", "--config", str(cfg), "--V", "4")
    assert code == 0 and json.loads(stdout)["domain_size"] == 4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "witness", "--config", str(bad))[0] == 2
    assert run(capsys, "witness", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_simulate_ok_and_expected_violation(capsys):
    code, stdout, _ = run(capsys, "simulate", "--algorithm", "abd", "--seeds", "30")
    assert code == 0 and json.loads(stdout)["runs"] == 30
    code, stdout, _ = run(capsys, "simulate", "--algorithm", "xor-demo", "--seeds", "50", "--expect-violation")
    assert code == 0 and not json.loads(stdout)["ok"]
    code, _, _ = run(capsys, "simulate", "--algorithm", "xor-demo", "--seeds", "50")
    assert code == 1
    code, _, _ = run(capsys, "simulate", "--algorithm", "abd", "--seeds", "10", "--expect-violation")
    assert code == 1


def test_simulate_empty_script(capsys):
    code, stdout, _ = run(capsys, "simulate", "--algorithm", "coded", "--seeds", "10", "--max-ops", "0")
    assert code == 0 and json.loads(stdout)["ok"]


def test_appendix_a_transcript(capsys):
    code, stdout, _ = run(capsys, "appendix-a", "--values", "3", "5", "9")
    assert code == 0 and "s2 - s1 = 5 (expected v2=5)" in stdout
    assert "before=[4, 4] after=[4, 4]" in stdout


def test_step_budget_flag_reaches_engine(capsys, monkeypatch):
    monkeypatch.setenv("REGMEM_STEP_BUDGET", "1000000")
    code, _, err = run(capsys, "witness", "--theorem", "1", "--algorithm", "abd", "--N", "3", "--f", "1", "--V", "4",
                       "--step-budget", "2")
    assert code == 2 and "budget" in err


def test_repeated_commands_are_byte_identical(capsys):
    argv = ["witness", "--theorem", "3", "--algorithm", "coded-gossip", "--N", "4", "--f", "2", "--V", "3"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    sim = ["simulate", "--algorithm", "coded", "--seeds", "20"]
    assert run(capsys, *sim)[1] == run(capsys, *sim)[1]
