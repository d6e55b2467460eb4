"""Write the normalized storage table for one (N, f) and print the crossover."""

import argparse
from pathlib import Path

from regmem.bounds import crossover, figure1_csv, figure1_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=21)
    ap.add_argument("--f", type=int, default=10)
    ap.add_argument("--nu-max", type=int, default=15)
    ap.add_argument("--out", type=Path, default=Path("storage_table.csv"))
    args = ap.parse_args()
    rows = figure1_table(args.N, args.f, range(1, args.nu_max + 1))
    args.out.write_text(figure1_csv(rows))
    print(f"wrote {args.out}; crossover nu={crossover(rows)}")


if __name__ == "__main__":
    main()
