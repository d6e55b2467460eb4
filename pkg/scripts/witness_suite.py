"""Run every counting witness at the acceptance parameters and write one JSON
report per run, plus a summary line each."""

import argparse
import itertools
import time
from pathlib import Path

from regmem.adversary import witness_thm1, witness_thm2, witness_thm3, witness_thm4
from regmem.algorithms import IGNORE_SECOND_WRITE, make_spec


def runs():
    for name, N, f, V in itertools.product(["abd", "coded"], [3, 4], [1, 2], [4, 8, 16]):
        if f < N:
            yield f"thm1-{name}-N{N}-f{f}-V{V}", lambda n=name, N=N, f=f, V=V: witness_thm1(make_spec(n, N, f, V))
    for V in (3, 4):
        yield f"thm2-abd-N4-f2-V{V}", lambda V=V: witness_thm2(make_spec("abd", 4, 2, V))
    yield "thm2-abd-mutated-N4-f2-V3", lambda: witness_thm2(make_spec("abd", 4, 2, 3, mutation=IGNORE_SECOND_WRITE))
    yield "thm3-coded-gossip-N4-f2-V3", lambda: witness_thm3(make_spec("coded-gossip", 4, 2, 3))
    for name in ("abd", "coded"):
        yield f"thm4-{name}-N4-f2-nu2-V4", lambda n=name: witness_thm4(make_spec(n, 4, 2, 4, nu=2), 2)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("witness_reports"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for label, run in runs():
        t = time.perf_counter()
        report = run()
        (args.out / f"{label}.json").write_text(report.to_json() + "\n")
        print(f"{label:32s} ok={report.ok!s:5s} distinct={report.distinct}/{len(report.fingerprints)} "
              f"lhs={report.lhs} rhs={report.rhs} {time.perf_counter() - t:.2f}s")


if __name__ == "__main__":
    main()
