"""Cumulant coefficients from the resolvent table by residues at z = -1.

``c^{[g]}_{k_1..k_n} = (-1)^n Res_{z_i=-1} prod x(z_i)^{k_i} w_{g,n}``, with
``tilde-w_{0,2}`` for (0, 2).  Near ``z = -1`` the map ``x(z)`` goes to
infinity, so the residue picks the coefficient of ``1/x`` per variable; the
sign ``(-1)^n`` orients the contour and is calibrated once by ``c^{[0]}_1 = 1``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import RationalFunc, residue_at
from .curve import fuss_catalan
from .loops import ResolventTable, Ring, to_w_form

POINT = -1

#: fixed once by c^{[0]}_1 = 1 (c^{[0]}_0 = 1 then follows)
ORIENTATION = -1

PROVENANCES = ("resolvent-residue", "map-oracle", "conjecture-formula")


@dataclass(frozen=True)
class CumulantRecord:
    g: int
    orders: tuple[int, ...]
    value: Fraction
    provenance: str = "resolvent-residue"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def row(self) -> list:
        return [self.g, *self.orders, str(self.value), self.provenance]


class MomentEngine:
    """Residue extraction with per-table caches of the weighted w-forms."""

    def __init__(self, table: ResolventTable):
        self.table = table
        self._w: dict = {}

    def _wform(self, g: int, n: int) -> RationalFunc:
        if (g, n) not in self._w:
            if (g, n) not in self.table:
                raise KeyError(f"resolvent table has no entry ({g}, {n})")
            self._w[(g, n)] = to_w_form(self.table, g, n, tilde=(g, n) == (0, 2))
        return self._w[(g, n)]

    def cumulant(self, g: int, orders: Sequence[int]) -> Fraction:
        orders = tuple(int(k) for k in orders)
        if any(k < 0 for k in orders):
            raise ValueError("orders must be non-negative")
        n = len(orders)
        f = self._wform(g, n)
        ring = self.table.ring(n)
        for i, k in enumerate(orders):
            if k:
                f = f * ring.x[i] ** k
        for i in range(n):
            f = residue_at(f, f.variables[0], POINT)
        assert f.is_polynomial() and not f.variables
        value = f()
        return Fraction(value) * ORIENTATION ** n

    def record(self, g: int, orders: Sequence[int]) -> CumulantRecord:
        return CumulantRecord(g, tuple(orders), self.cumulant(g, orders))


def cumulant_from_resolvent(table: ResolventTable, g: int, orders: Sequence[int]) -> Fraction:
    return MomentEngine(table).cumulant(g, orders)


def planar_recurrence_terms(k: int, q: int, c1, c2) -> list[Fraction]:
    """The four sums of the planar two-point recurrence, for k >= 2, q >= 1.

    ``c1(p)`` and ``c2(a, b)`` return planar one- and two-point cumulants.
    """
    if k < 2 or q < 1:
        raise ValueError("recurrence is stated for k >= 2, q >= 1")
    triple = 3 * sum(
        c1(p1) * c1(p2) * c2(k - 3 - p1 - p2 + 1, q)
        for p1 in range(0, k - 2)
        for p2 in range(0, k - 2 - p1)
    )
    minus = -c2(k - 1, q)
    s1 = sum(q * c1(k + q - m - 2) * c1(m) for m in range(0, k + q - 1))
    s2 = sum(q * c1(k - m - 2) * c1(m + q) for m in range(0, k - 1))
    return [Fraction(triple), Fraction(minus), Fraction(s1), Fraction(s2)]


def check_planar_recurrence(k: int, q: int, engine: MomentEngine) -> bool:
    c1 = functools.lru_cache(None)(lambda p: engine.cumulant(0, (p,)))
    c2 = functools.lru_cache(None)(lambda a, b: engine.cumulant(0, (a, b)))
    return sum(planar_recurrence_terms(k, q, c1, c2)) == 0


def recurrence_domain(max_total: int) -> list[tuple[int, int]]:
    return [(k, q) for k in range(2, max_total + 1) for q in range(1, max_total + 1 - k)]


def conjectured_c0_2pt(i: int, j: int) -> Fraction:
    """2ij/(3(i+j)) binom(3i,i) binom(3j,j)."""
    return Fraction(2 * i * j, 3 * (i + j)) * math.comb(3 * i, i) * math.comb(3 * j, j)


def conjectured_c1_1pt(n: int) -> Fraction:
    """(n-1)^2 n / (6(3n-1)) binom(3n, n)."""
    return Fraction((n - 1) ** 2 * n, 6 * (3 * n - 1)) * math.comb(3 * n, n)


@dataclass
class ConjectureReport:
    two_point: list[dict]
    genus_one: list[dict]

    @property
    def all_agree(self) -> bool:
        return all(r["agree"] for r in self.two_point + self.genus_one)

    def to_json(self) -> dict:
        return {
            "status": "conjectures consistent with extracted values" if self.all_agree
            else "conjecture violated",
            "c0_two_point": self.two_point,
            "c1_one_point": self.genus_one,
        }


def check_conjectures(engine: MomentEngine, max_order: int = 7) -> ConjectureReport:
    two, one = [], []
    for i in range(1, max_order + 1):
        for j in range(i, max_order + 1):
            got = engine.cumulant(0, (i, j))
            want = conjectured_c0_2pt(i, j)
            two.append({"i": i, "j": j, "residue": str(got), "formula": str(want), "agree": got == want})
    for n in range(1, max_order + 1):
        got = engine.cumulant(1, (n,))
        want = conjectured_c1_1pt(n)
        one.append({"n": n, "residue": str(got), "formula": str(want), "agree": got == want})
    return ConjectureReport(two, one)


def fuss_catalan_check(engine: MomentEngine, kmax: int = 12) -> list[tuple[int, Fraction, int]]:
    return [(k, engine.cumulant(0, (k,)), fuss_catalan(k, 3)) for k in range(kmax + 1)]


def moment_table(engine: MomentEngine, g: int, n: int, max_order: int,
                 min_order: int = 1) -> list[CumulantRecord]:
    """Records for every non-decreasing order tuple with entries in range."""
    import itertools

    out = []
    for orders in itertools.combinations_with_replacement(range(min_order, max_order + 1), n):
        out.append(engine.record(g, orders))
    return out
