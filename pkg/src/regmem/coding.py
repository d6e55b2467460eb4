"""Non-systematic Reed-Solomon (Vandermonde) code over GF(2^m), m in {4, 8}.

A value is a vector of field elements, zero-padded to a multiple of ``k`` and
cut into stripes of ``k`` coefficients.  Symbol ``i`` holds, for every stripe,
the stripe polynomial evaluated at the i-th nonzero field element in generator
order.  Any ``k`` symbols recover the value.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import FieldTooLarge, InconsistentSymbols, InvalidParams, SingularSystem

BRUTE_FORCE_BUDGET = 10**6


class GaloisField:
    """GF(2^m) with log/antilog tables; the generator is x (the integer 2)."""

    def __init__(self, m: int, modulus: int) -> None:
        self.m = m
        self.size = 1 << m
        self.modulus = modulus
        order = self.size - 1
        self.exp = [0] * (2 * order)
        self.log = [0] * self.size
        x = 1
        for i in range(order):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x & self.size:
                x ^= modulus
        if x != 1 or len(set(self.exp[:order])) != order:
            raise InvalidParams(f"modulus {modulus:#x} is not primitive for m={m}")
        for i in range(order, 2 * order):
            self.exp[i] = self.exp[i - order]

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.exp[(self.size - 1 - self.log[a]) % (self.size - 1)]

    def power(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return self.exp[(self.log[a] * e) % (self.size - 1)]

    def element(self, i: int) -> int:
        """The i-th nonzero element (1-based) in generator order."""
        if not 1 <= i <= self.size - 1:
            raise InvalidParams(f"no nonzero element number {i} in GF(2^{self.m})")
        return self.exp[i - 1]

    def __repr__(self) -> str:
        return f"GF(2^{self.m})"


FIELDS = {4: GaloisField(4, 0x13), 8: GaloisField(8, 0x11D)}


def field(m: int) -> GaloisField:
    try:
        return FIELDS[m]
    except KeyError:
        raise InvalidParams(f"unsupported field GF(2^{m}); use m=4 or m=8") from None


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    m: int = 4

    def __post_init__(self) -> None:
        gf = field(self.m)
        if not 1 <= self.k <= self.n <= gf.size - 1:
            raise InvalidParams(f"need 1 <= k <= n <= {gf.size - 1}, got n={self.n}, k={self.k}")

    @property
    def gf(self) -> GaloisField:
        return FIELDS[self.m]

    def point(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise InvalidParams(f"symbol index {i} outside 1..{self.n}")
        return self.gf.element(i)

    def stripes(self, value_len: int) -> int:
        return -(-value_len // self.k)


@dataclass(frozen=True)
class Codeword:
    symbols: dict
    value_len: int


def encode(value: Sequence[int], p: CodeParams) -> Codeword:
    if not value:
        raise InvalidParams("cannot encode an empty value")
    gf = p.gf
    if any(not 0 <= x < gf.size for x in value):
        raise InvalidParams(f"value has elements outside {gf!r}")
    stripes = p.stripes(len(value))
    padded = list(value) + [0] * (stripes * p.k - len(value))
    symbols = {}
    for i in range(1, p.n + 1):
        powers = [gf.power(p.point(i), t) for t in range(p.k)]
        sym = []
        for s in range(stripes):
            acc = 0
            for t in range(p.k):
                acc ^= gf.mul(padded[s * p.k + t], powers[t])
            sym.append(acc)
        symbols[i] = tuple(sym)
    return Codeword(symbols, len(value))


def _invert(gf: GaloisField, rows: list[list[int]]) -> list[list[int]]:
    size = len(rows)
    aug = [row[:] + [1 if i == j else 0 for j in range(size)] for i, row in enumerate(rows)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col]), None)
        if pivot is None:
            raise SingularSystem("evaluation matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = gf.inv(aug[col][col])
        aug[col] = [gf.mul(x, scale) for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x ^ gf.mul(f, y) for x, y in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]


def decode(pairs: Sequence[tuple[int, Sequence[int]]], p: CodeParams,
           value_len: Optional[int] = None) -> tuple[int, ...]:
    """Recover the value from at least ``k`` (index, symbol) pairs.

    The first ``k`` pairs are solved; any extra pairs are checked against the
    solution and a mismatch raises :class:`InconsistentSymbols`.
    """
    if len(pairs) < p.k:
        raise InvalidParams(f"need {p.k} symbols, got {len(pairs)}")
    indices = [i for i, _ in pairs]
    if len(set(indices)) != len(indices):
        raise SingularSystem(f"duplicate symbol indices {indices}")
    gf = p.gf
    stripes = len(pairs[0][1])
    if any(len(sym) != stripes for _, sym in pairs):
        raise InvalidParams("symbols have different stripe counts")
    chosen = list(pairs[: p.k])
    matrix = [[gf.power(p.point(i), t) for t in range(p.k)] for i, _ in chosen]
    inverse = _invert(gf, matrix)
    value: list[int] = []
    for s in range(stripes):
        ys = [sym[s] for _, sym in chosen]
        for row in inverse:
            acc = 0
            for a, y in zip(row, ys):
                acc ^= gf.mul(a, y)
            value.append(acc)
    length = len(value) if value_len is None else value_len
    if len(pairs) > p.k:
        check = encode(value, p)
        for i, sym in pairs[p.k:]:
            if check.symbols[i] != tuple(sym):
                raise InconsistentSymbols(f"symbol {i} disagrees with the decoded value")
    if any(value[length:]):
        raise InconsistentSymbols("padding positions are nonzero")
    return tuple(value[:length])


def _solutions_by_rank(gf: GaloisField, rows: list[list[int]], targets: list[int], k: int) -> int:
    """Exact number of coefficient vectors meeting ``rows . c = targets``."""
    aug = [row[:] + [y] for row, y in zip(rows, targets)]
    rank = 0
    for col in range(k):
        pivot = next((r for r in range(rank, len(aug)) if aug[r][col]), None)
        if pivot is None:
            continue
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        scale = gf.inv(aug[rank][col])
        aug[rank] = [gf.mul(x, scale) for x in aug[rank]]
        for r in range(len(aug)):
            if r != rank and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x ^ gf.mul(f, y) for x, y in zip(aug[r], aug[rank])]
        rank += 1
    if any(row[-1] for row in aug[rank:]):
        return 0
    return gf.size ** (k - rank)


def _solutions_by_search(gf: GaloisField, rows: list[list[int]], targets: list[int], k: int) -> int:
    hits = 0
    for coeffs in itertools.product(range(gf.size), repeat=k):
        ok = True
        for row, y in zip(rows, targets):
            acc = 0
            for a, c in zip(row, coeffs):
                acc ^= gf.mul(a, c)
            if acc != y:
                ok = False
                break
        hits += ok
    return hits


def ambiguity_count(pairs: Sequence[tuple[int, Sequence[int]]], p: CodeParams, stripes: int = 1,
                    method: str = "auto") -> int:
    """Number of values (``stripes * k`` elements) consistent with the symbols.

    ``method="search"`` enumerates every candidate stripe, ``"rank"`` counts
    solutions of the linear system exactly, ``"auto"`` searches while the
    candidate space fits :data:`BRUTE_FORCE_BUDGET` and counts by rank beyond.
    """
    if len(pairs) > p.k:
        raise InvalidParams(f"at most k={p.k} symbols allowed")
    indices = [i for i, _ in pairs]
    if len(set(indices)) != len(indices):
        raise SingularSystem(f"duplicate symbol indices {indices}")
    if method not in ("auto", "search", "rank"):
        raise InvalidParams(f"unknown counting method {method!r}")
    gf = p.gf
    small = gf.size ** p.k <= BRUTE_FORCE_BUDGET
    if method == "search" and not small:
        raise FieldTooLarge(f"brute force over {gf!r} with k={p.k} exceeds budget")
    count = _solutions_by_search if method == "search" or (method == "auto" and small) else _solutions_by_rank
    rows = [[gf.power(p.point(i), t) for t in range(p.k)] for i in indices]
    total = 1
    for s in range(stripes):
        total *= count(gf, rows, [sym[s] for _, sym in pairs], p.k)
    return total


def elements_needed(n_values: int, m: int) -> int:
    """Field elements needed to represent ``n_values`` distinct values."""
    width, span = 1, 1 << m
    while span < n_values:
        width += 1
        span <<= m
    return width


def value_to_elements(x: int, width: int, m: int) -> tuple[int, ...]:
    mask = (1 << m) - 1
    return tuple((x >> (m * j)) & mask for j in range(width))


def elements_to_value(elems: Iterable[int], m: int) -> int:
    return sum(e << (m * j) for j, e in enumerate(elems))


def symbol_bits(p: CodeParams, value_len: int) -> int:
    return p.stripes(value_len) * p.m


def _hex(elems: Sequence[int], m: int) -> str:
    digits = m // 4
    return "".join(f"{e:0{digits}x}" for e in elems)


def vectors_csv(cases: Iterable[tuple[CodeParams, Sequence[int]]]) -> str:
    """CSV rows of (n, k, m, value hex, symbols hex joined by ';')."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["n", "k", "m", "value_hex", "symbols_hex"])
    for p, value in cases:
        cw = encode(value, p)
        syms = ";".join(_hex(cw.symbols[i], p.m) for i in range(1, p.n + 1))
        out.writerow([p.n, p.k, p.m, _hex(value, p.m), syms])
    return buf.getvalue()


def read_vectors(text: str) -> list[tuple[CodeParams, tuple[int, ...], dict]]:
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        p = CodeParams(int(row["n"]), int(row["k"]), int(row["m"]))
        d = p.m // 4

        def elems(h: str) -> tuple[int, ...]:
            return tuple(int(h[j:j + d], 16) for j in range(0, len(h), d))

        syms = {i + 1: elems(h) for i, h in enumerate(row["symbols_hex"].split(";"))}
        rows.append((p, elems(row["value_hex"]), syms))
    return rows
