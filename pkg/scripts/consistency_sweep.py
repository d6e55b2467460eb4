"""Random-schedule atomicity sweeps over the reference protocols."""

import argparse
import json

from regmem.workloads import SweepConfig, sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--algorithms", nargs="+", default=["abd", "coded", "coded-gossip"])
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 4, 5])
    args = ap.parse_args()
    for name in args.algorithms:
        for N in args.sizes:
            report = sweep(SweepConfig(name, N, 1, seeds=tuple(range(args.seeds))))
            print(json.dumps({k: v for k, v in report.as_dict().items() if k != "violations"}, sort_keys=True))


if __name__ == "__main__":
    main()
