"""Closed-form storage bounds in exact arithmetic.

Normalized costs are coefficients of log2|V| as :class:`~fractions.Fraction`.
Bit-level bounds keep logarithms symbolic (:class:`LogExpr`) and are only
turned into decimals on request.  Witness checks use the multiplicative
integer form of each inequality, so no floating point ever decides a
comparison.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import mpmath

from .errors import InvalidParams


@dataclass(frozen=True)
class BoundParams:
    N: int
    f: int
    nu: int = 1
    V: int = 2

    def __post_init__(self) -> None:
        if not 1 <= self.f < self.N:
            raise InvalidParams(f"need 1 <= f < N, got N={self.N}, f={self.f}")
        if self.nu < 1:
            raise InvalidParams(f"nu must be at least 1, got {self.nu}")
        if self.V < 1:
            raise InvalidParams(f"the value domain must be nonempty, got V={self.V}")

    @property
    def nu_star(self) -> int:
        return min(self.nu, self.f + 1)

    @property
    def live(self) -> int:
        return self.N - self.f


@dataclass(frozen=True)
class LogExpr:
    """``const + sum(coeff * log2(arg))`` with rational coefficients."""

    const: Fraction = Fraction(0)
    terms: tuple[tuple[Fraction, int], ...] = ()

    def value(self, dps: int = 40) -> mpmath.mpf:
        with mpmath.workdps(dps):
            total = mpmath.mpf(self.const.numerator) / self.const.denominator
            for coeff, arg in self.terms:
                total += mpmath.mpf(coeff.numerator) / coeff.denominator * mpmath.log(arg, 2)
            return +total

    def __float__(self) -> float:
        return float(self.value())

    def __str__(self) -> str:
        parts = [str(self.const)] if self.const else []
        for coeff, arg in self.terms:
            parts.append(f"{coeff}*log2({arg})")
        return " + ".join(parts) if parts else "0"


def _log(*terms: tuple[int, int], const: Fraction = Fraction(0)) -> LogExpr:
    """Collect ``coeff * log2(arg)`` terms, folding exact powers of two."""
    folded = Fraction(const)
    kept: dict[int, Fraction] = {}
    for coeff, arg in terms:
        if arg < 1:
            raise InvalidParams(f"log2 of {arg} is undefined")
        if arg & (arg - 1) == 0:
            folded += Fraction(coeff) * (arg.bit_length() - 1)
        else:
            kept[arg] = kept.get(arg, Fraction(0)) + Fraction(coeff)
    return LogExpr(folded, tuple((c, a) for a, c in sorted(kept.items()) if c))


@dataclass(frozen=True)
class ProductForm:
    """``multiplier * prod(counts) * max(counts)**max_power >= rhs``."""

    rhs: int
    multiplier: int
    max_power: int
    template: str

    def lhs(self, counts: Sequence[int]) -> int:
        if not counts:
            return self.multiplier * (1 if self.max_power == 0 else 0)
        return self.multiplier * math.prod(counts) * max(counts) ** self.max_power

    def holds(self, counts: Sequence[int]) -> bool:
        return self.lhs(counts) >= self.rhs


@dataclass(frozen=True)
class BoundResult:
    theorem: str
    params: BoundParams
    normalized: Fraction
    bits: LogExpr
    product_form: ProductForm
    notes: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "N": self.params.N, "f": self.params.f, "nu": self.params.nu, "V": self.params.V,
            "normalized": str(self.normalized),
            "bits": str(self.bits),
            "bits_decimal": mpmath.nstr(self.bits.value(), 12),
            "product_form": {"template": self.product_form.template, "rhs": str(self.product_form.rhs),
                             "multiplier": str(self.product_form.multiplier)},
            "notes": list(self.notes),
        }


def falling_factorial(x: int, k: int) -> int:
    return math.prod(range(x - k + 1, x + 1)) if k <= x else 0


def bound_thm1(p: BoundParams) -> BoundResult:
    """Single-write counting bound: the N - f live servers determine the value."""
    return BoundResult(
        "thm1", p, Fraction(p.N, p.live), _log((1, p.V)),
        ProductForm(p.V, 1, 0, "prod |S_n| >= V"),
    )


def bound_thm2(p: BoundParams, enforce_hypothesis: bool = True) -> BoundResult:
    """Two-write bound for protocols without server-to-server messages."""
    notes = ()
    if p.f < 2:
        if enforce_hypothesis:
            raise InvalidParams(f"this bound is stated for f >= 2, got f={p.f}")
        notes = ("evaluated outside the stated hypothesis f >= 2",)
    if p.V < 2:
        raise InvalidParams("need at least two values")
    return BoundResult(
        "thm2", p, Fraction(2 * p.N, p.live + 1),
        _log((1, p.V), (1, p.V - 1), (-1, p.live)),
        ProductForm(p.V * (p.V - 1), p.live, 1, "prod |S_n| * max |S_n| * (N-f) >= V(V-1)"),
        notes,
    )


def bound_thm3(p: BoundParams) -> BoundResult:
    """Two-write bound that survives server gossip."""
    if p.V < 2:
        raise InvalidParams("need at least two values")
    return BoundResult(
        "thm3", p, Fraction(2 * p.N, p.live + 2),
        _log((1, p.V), (1, p.V - 1), (-2, p.live)),
        ProductForm(p.V * (p.V - 1), p.live ** 2, 2, "prod |S_n| * max |S_n|^2 * (N-f)^2 >= V(V-1)"),
    )


def bound_thm4(p: BoundParams) -> BoundResult:
    """Bound for the restricted writer class with nu concurrent writes.

    The bit bound uses the binomial C(V-1, nu*).  The integer check counts
    ordered distinct tuples, the falling factorial (V-1)...(V-nu*), which is
    the size of the family the staged executions actually enumerate.
    """
    k = p.nu_star
    servers = p.live + k - 1
    if p.V - 1 < k:
        raise InvalidParams(f"need at least nu*={k} values besides the initial one, got V={p.V}")
    bits = _log((1, math.comb(p.V - 1, k)), (-k, servers), (-1, math.factorial(k)))
    form = ProductForm(falling_factorial(p.V - 1, k), math.factorial(k) * servers ** k, 0,
                       f"nu*! * (N-f+nu*-1)^nu* * prod_(n<={servers}) |S_n| >= (V-1)_nu*")
    return BoundResult(
        "thm4", p, Fraction(k * p.N, p.live + k - 1), bits, form,
        ("bits use the binomial C(V-1, nu*); the integer check uses the ordered-tuple count",),
    )


BOUNDS = {"thm1": bound_thm1, "thm2": bound_thm2, "thm3": bound_thm3, "thm4": bound_thm4}


@dataclass(frozen=True)
class FigureRow:
    nu: int
    abd: Fraction
    erasure: Fraction
    thm1: Fraction
    thm3: Fraction
    thm4: Fraction


def figure1_table(N: int, f: int, nu_values: Iterable[int]) -> list[FigureRow]:
    """Normalized total storage of the two upper bounds and three lower bounds."""
    rows = []
    for nu in nu_values:
        p = BoundParams(N, f, nu)
        rows.append(FigureRow(
            nu=nu,
            abd=Fraction(f + 1),
            erasure=Fraction(nu * N, N - f),
            thm1=bound_thm1(p).normalized,
            thm3=Fraction(2 * N, N - f + 2),
            thm4=Fraction(p.nu_star * N, N - f + p.nu_star - 1),
        ))
    return rows


def crossover(rows: Sequence[FigureRow]) -> Optional[int]:
    """Smallest nu at which erasure coding costs more than replication."""
    return next((r.nu for r in rows if r.erasure > r.abd), None)


FIGURE_COLUMNS = ("nu", "abd", "erasure", "thm1", "thm3", "thm4")


def figure1_csv(rows: Sequence[FigureRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(FIGURE_COLUMNS)
    for r in rows:
        out.writerow([r.nu] + [str(getattr(r, c)) for c in FIGURE_COLUMNS[1:]])
    return buf.getvalue()


def per_server_bits(counts: Mapping[int, int]) -> dict[int, LogExpr]:
    """log2 of observed per-server state counts."""
    return {n: _log((1, c)) for n, c in counts.items()}
