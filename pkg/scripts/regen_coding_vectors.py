"""Regenerate tests/data/coding_vectors.csv from the fixed parameter list."""

from pathlib import Path

from regmem.coding import CodeParams, vectors_csv

CASES = [
    (CodeParams(3, 2, 4), (1, 2)),
    (CodeParams(4, 1, 4), (7,)),
    (CodeParams(5, 3, 4), (1, 2, 3, 4)),
    (CodeParams(6, 4, 8), (0x12, 0x34, 0xAB, 0xCD, 0xEF)),
    (CodeParams(2, 2, 8), (255, 1)),
]

if __name__ == "__main__":
    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "coding_vectors.csv"
    out.write_text(vectors_csv(CASES))
    print(f"wrote {out}")
