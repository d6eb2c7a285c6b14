"""Recursive solution of the connected loop equations on the spectral curve.

All work happens on substituted resolvents ``W^z_{g,n}(z_1..z_n) =
W_{g,n}(x(z_1), ..., x(z_n))``; the x-derivative in slot ``i`` is
``D_i = (1/x'(z_i)) d/dz_i``.  For ``2g-2+n > 0`` the equation for
``W_{g,n}`` is linear in the unknown, whose coefficient is
``3 y(z_1)^2 - 1/x(z_1) = -sigma(z_1)``; every other term involves entries of
lower complexity ``2g-2+n`` (or equal complexity and fewer points).

Term inventory for the unknown ``W_{g,n}(x_1; x_2..x_n)``:

* ``tilde-W``: products over set partitions ``mu`` of the three copies of
  ``x_1`` with spectators distributed over the blocks, genus total
  ``g + |mu| + genus_offset`` (``genus_offset = -3``);
* ``O_x W_{g-1,n}`` acting on slot 1;
* minus a Vandermonde divided difference for each spectator pair;
* two divided differences ``(x_1 - x_i)^{-1}`` per spectator, built from sums
  over set partitions of the list ``[a, b]`` with genus total ``g + |J| - 2``.

The assembly is written once against a small backend interface.  The
symbolic backend works in Q(z_1..z_n); the sampled backend in
:mod:`ginibre_loops.sampling` keeps ``z_1`` symbolic and pins the spectators
to integers, which is what makes ``n >= 4`` affordable.
"""
from __future__ import annotations

import contextlib
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .algebra import RationalFunc
from .curve import build_curve

log = logging.getLogger(__name__)

#: genus total of the tilde-W block products is g + |mu| + GENUS_OFFSET
GENUS_OFFSET = -3

#: entries with at most this many points are solved fully symbolically by
#: default; larger ones go through the sampled route
SYMBOLIC_MAX_N = 3


class LoopSolverError(RuntimeError):
    pass


def zvars(n: int) -> tuple[str, ...]:
    return tuple(f"z{i}" for i in range(1, n + 1))


def complexity(g: int, n: int) -> int:
    return 2 * g - 2 + n


def schedule(chi_max: int) -> list[tuple[int, int]]:
    """Every (g, n) with 0 < 2g-2+n <= chi_max, by complexity then n."""
    out = []
    for chi in range(1, chi_max + 1):
        for n in range(1, chi + 3):
            if (chi + 2 - n) % 2 == 0:
                out.append(((chi + 2 - n) // 2, n))
    return sorted(out, key=lambda gn: (complexity(*gn), gn[1]))


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Non-negative integer vectors of length ``parts`` summing to ``total``."""
    if total < 0:
        return
    if parts == 1:
        yield (total,)
        return
    for a in range(total + 1):
        for rest in compositions(total - a, parts - 1):
            yield (a,) + rest


def distributions(spectators: Sequence[int], blocks: int) -> Iterator[list[list[int]]]:
    for assign in itertools.product(range(blocks), repeat=len(spectators)):
        yield [[s for s, a in zip(spectators, assign) if a == b] for b in range(blocks)]


@dataclass(frozen=True)
class PartitionTerm:
    """One product in the tilde-W sum: blocks of slot indices with genera.

    ``parts`` holds, per block, the copies of ``x_1`` it received (slot 0);
    ``spectators`` the spectator slots.
    """

    parts: tuple[tuple[int, ...], ...]
    spectators: tuple[tuple[int, ...], ...]
    genera: tuple[int, ...]

    def blocks(self) -> list[tuple[int, list[int]]]:
        return [(gb, list(p) + list(s)) for p, s, gb in zip(self.parts, self.spectators, self.genera)]


class Ring:
    """Curve data embedded in the n-variable field Q(z_1..z_n)."""

    def __init__(self, n: int):
        self.n = n
        self.vars = zvars(n)
        c = build_curve("z")
        self.x = [c.x_of_z.remap([i], self.vars) for i in range(n)]
        self.y = [c.y_of_z.remap([i], self.vars) for i in range(n)]
        self.xp = [c.xprime_of_z.remap([i], self.vars) for i in range(n)]
        self.sigma = c.sigma_of_z.remap([0], self.vars)

    def D(self, f: RationalFunc, i: int) -> RationalFunc:
        """x-derivative in slot i."""
        return f.diff(self.vars[i]) / self.xp[i]


class ResolventTable:
    """(g, n) -> W^z_{g,n}(z_1..z_n), plus solver bookkeeping."""

    def __init__(self, genus_offset: int = GENUS_OFFSET):
        self.entries: dict[tuple[int, int], RationalFunc] = {}
        self.timings: dict[tuple[int, int], float] = {}
        self.methods: dict[tuple[int, int], str] = {}
        self.genus_offset = genus_offset
        self._rings: dict[int, Ring] = {}
        self._remaps: dict = {}
        c = build_curve("z")
        self.entries[(0, 1)] = c.y_of_z.remap([0], zvars(1))
        self.entries[(0, 2)] = base_w02()
        self.methods[(0, 1)] = self.methods[(0, 2)] = "base"

    def ring(self, n: int) -> Ring:
        if n not in self._rings:
            self._rings[n] = Ring(n)
        return self._rings[n]

    def __contains__(self, gn) -> bool:
        return tuple(gn) in self.entries

    def __getitem__(self, gn) -> RationalFunc:
        return self.entries[tuple(gn)]

    def keys(self):
        return self.entries.keys()

    def store(self, g: int, n: int, f: RationalFunc, method: str, seconds: float) -> None:
        self.entries[(g, n)] = f
        self.methods[(g, n)] = method
        self.timings[(g, n)] = seconds

    def at(self, g: int, slots: Sequence[int], n: int) -> RationalFunc:
        """W^z_{g,len(slots)} with its variables sent to the given slots of
        the n-variable ring (repeated slots mean diagonal evaluation)."""
        key = (g, tuple(slots), n)
        hit = self._remaps.get(key)
        if hit is not None:
            return hit
        gm = (g, len(slots))
        if gm not in self.entries:
            raise LoopSolverError(f"missing prerequisite W_{gm}")
        f = self.entries[gm].remap(list(slots), zvars(n))
        self._remaps[key] = f
        return f

    def w_form(self, g: int, n: int, tilde: bool = False) -> RationalFunc:
        return to_w_form(self, g, n, tilde=tilde)

    def to_json(self) -> dict:
        return {f"{g},{n}": f.to_json() for (g, n), f in sorted(self.entries.items())}

    @classmethod
    def from_json(cls, data: dict, genus_offset: int = GENUS_OFFSET) -> "ResolventTable":
        table = cls(genus_offset)
        for key, payload in data.items():
            g, n = (int(t) for t in key.split(","))
            table.entries[(g, n)] = RationalFunc.from_json(payload)
            table.methods.setdefault((g, n), "loaded")
        return table


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


class SymbolicBackend:
    """Assembly in the full field Q(z_1..z_n)."""

    def __init__(self, table: ResolventTable, n: int):
        self.table = table
        self.n = n
        self.ring = table.ring(n)

    def x(self, i: int) -> RationalFunc:
        return self.ring.x[i]

    def D(self, f: RationalFunc, i: int) -> RationalFunc:
        return self.ring.D(f, i)

    def at(self, g: int, slots: Sequence[int]) -> RationalFunc:
        return self.table.at(g, slots, self.n)

    def const(self, c) -> RationalFunc:
        return RationalFunc.constant(self.ring.vars, c)

    def focus(self, *spectators: int):
        return contextlib.nullcontext()

    def diff_quotient(self, numerator: RationalFunc, i: int, j: int) -> RationalFunc:
        return diff_quotient(numerator, i, j, self.ring)


# ---------------------------------------------------------------------------
# base cases
# ---------------------------------------------------------------------------


def base_w02() -> RationalFunc:
    """W^z_{0,2} = [1/(z1-z2)^2 - x'1 x'2/(x1-x2)^2] / (x'1 x'2)."""
    r = Ring(2)
    z1, z2 = RationalFunc.gens(r.vars)
    xx = r.xp[0] * r.xp[1]
    return (1 / (z1 - z2) ** 2 - xx / (r.x[0] - r.x[1]) ** 2) / xx


def solve_w02_from_loop() -> RationalFunc:
    """tilde-w_{0,2} from the planar two-point loop equation alone.

    Right-hand side: ``(x'_1/x_1^2) d/dz_2`` of the two divided differences in
    ``y``, divided by ``sigma(z_1)``.
    """
    r = Ring(2)
    x1, x2 = r.x
    y1, y2 = r.y
    a = x1 * x2 * (y1 ** 2 - y1 * y2) / (x1 - x2)
    b = (x1 * x2 * y1 ** 2 - x2 ** 2 * y2 ** 2) / (x1 - x2)
    rhs = r.xp[0] / x1 ** 2 * (a + b).diff("z2")
    return rhs / r.sigma


# ---------------------------------------------------------------------------
# operators and terms
# ---------------------------------------------------------------------------


def op_Ox(f, i: int, backend):
    """(1/x_i) D_i f + (1/2) D_i^2 f."""
    d = backend.D(f, i)
    return d / backend.x(i) + backend.D(d, i) / 2


def diff_quotient(numerator: RationalFunc, i: int, j: int, ring: Ring) -> RationalFunc:
    """numerator / (x(z_i) - x(z_j)); raises if a factor z_i - z_j survives in
    the reduced denominator, i.e. the numerator did not vanish on x_i = x_j."""
    out = numerator / (ring.x[i] - ring.x[j])
    zs = RationalFunc.gens(ring.vars)
    try:
        out.den.divexact((zs[i] - zs[j]).num)
    except ArithmeticError:
        return out
    raise LoopSolverError(f"divided difference in slots {i},{j} left a diagonal pole")


def vandermonde_term(backend, g: int, n: int, i: int, j: int):
    """Three-point divided difference over {x_1, x_i, x_j} of x-weighted
    W_{g,n-2}, differentiated once in slots i and j and scaled by 2/x_1^3."""
    with backend.focus(i, j):
        x1, xi, xj = backend.x(0), backend.x(i), backend.x(j)
        rest = [k for k in range(1, n) if k not in (i, j)]
        w_ij = backend.at(g, [0] + rest)
        w_1j = backend.at(g, [i] + rest)
        w_1i = backend.at(g, [j] + rest)
        delta = (xj - xi) * (xj - x1) * (xi - x1)
        expr = x1 * xi * xj * ((xi - xj) * w_ij - (x1 - xj) * w_1j + (x1 - xi) * w_1i) / delta
        return 2 / x1 ** 3 * backend.D(backend.D(expr, i), j)


def _pair_sum(backend, g: int, slots: tuple[int, int], others: list[int]):
    """Sum over set partitions J of the list ``slots`` (two entries), others
    distributed over the blocks, genus total g + |J| - 2."""
    total = backend.const(0)
    for J in set_partitions([0, 1]):
        k = len(J)
        for K in distributions(others, k):
            for gs in compositions(g + k - 2, k):
                prod = backend.const(1)
                for b in range(k):
                    prod = prod * backend.at(gs[b], [slots[t] for t in J[b]] + K[b])
                total = total + prod
    return total


def difference_terms(backend, g: int, n: int, i: int):
    with backend.focus(i):
        x1, xi = backend.x(0), backend.x(i)
        others = [k for k in range(1, n) if k != i]
        s11 = _pair_sum(backend, g, (0, 0), others)
        s1i = _pair_sum(backend, g, (0, i), others)
        sii = _pair_sum(backend, g, (i, i), others)
        t1 = backend.diff_quotient(x1 * xi * (s11 - s1i), 0, i)
        t2 = backend.diff_quotient(x1 * xi * s11 - xi ** 2 * sii, 0, i)
        return (backend.D(t1, i) + backend.D(t2, i)) / x1 ** 2


def partition_terms(g: int, n: int, genus_offset: int = GENUS_OFFSET) -> Iterator[PartitionTerm]:
    spectators = list(range(1, n))
    for mu in set_partitions([0, 1, 2]):
        k = len(mu)
        for J in distributions(spectators, k):
            for gs in compositions(g + k + genus_offset, k):
                yield PartitionTerm(
                    tuple(tuple(0 for _ in block) for block in mu),
                    tuple(tuple(j) for j in J),
                    gs,
                )


def tilde_w_term(backend, g: int, n: int, genus_offset: int = GENUS_OFFSET,
                 exclude_unknown: bool = True):
    """(known part, coefficient of the unknown W_{g,n}(z_1; z_2..z_n)).

    The unknown appears in three-block partitions where one block carries
    genus g and every spectator; each such product is set aside and its
    remaining factor added to the coefficient.
    """
    known = backend.const(0)
    coeff = backend.const(0)
    with backend.focus():
        for term in partition_terms(g, n, genus_offset):
            blocks = term.blocks()
            hits = [b for b, (gb, s) in enumerate(blocks) if gb == g and len(s) == n]
            if hits and exclude_unknown:
                rest = backend.const(1)
                for b, (gb, s) in enumerate(blocks):
                    if b != hits[0]:
                        rest = rest * backend.at(gb, s)
                coeff = coeff + rest
                continue
            prod = backend.const(1)
            for gb, s in blocks:
                prod = prod * backend.at(gb, s)
            known = known + prod
    return known, coeff


def assemble(backend, g: int, n: int, genus_offset: int = GENUS_OFFSET):
    """(known terms, coefficient of the unknown) of the (g, n) loop equation."""
    known, coeff = tilde_w_term(backend, g, n, genus_offset)
    with backend.focus():
        coeff = coeff - 1 / backend.x(0)
        if g >= 1:
            known = known + op_Ox(backend.at(g - 1, list(range(n))), 0, backend)
        if (g, n) == (0, 1):
            known = known + 1 / backend.x(0) ** 2
    for i, j in itertools.combinations(range(1, n), 2):
        known = known - vandermonde_term(backend, g, n, i, j)
    for i in range(1, n):
        known = known + difference_terms(backend, g, n, i)
    return known, coeff


def _check_prerequisites(table: ResolventTable, g: int, n: int) -> None:
    for h, m in prerequisites([(g, n)]):
        if (h, m) != (g, n) and (h, m) not in table:
            raise LoopSolverError(f"W_{(h, m)} must be solved before W_{(g, n)}")


def solve_symbolic(table: ResolventTable, g: int, n: int) -> RationalFunc:
    known, coeff = assemble(SymbolicBackend(table, n), g, n, table.genus_offset)
    if coeff.is_zero():
        raise LoopSolverError("unknown coefficient vanished")
    return -known / coeff


def solve_wgn(table: ResolventTable, g: int, n: int, check: bool = True,
              method: str = "auto", seed: int = 0) -> RationalFunc:
    """Solve the (g, n) equation and store W^z_{g,n} in the table.

    ``method`` is ``symbolic``, ``sampled`` or ``auto`` (symbolic for
    n <= SYMBOLIC_MAX_N).
    """
    if complexity(g, n) <= 0:
        raise ValueError("(g, n) with 2g-2+n <= 0 are base cases")
    _check_prerequisites(table, g, n)
    if method == "auto":
        method = "symbolic" if n <= SYMBOLIC_MAX_N else "sampled"
    t0 = time.perf_counter()
    if method == "symbolic":
        W = solve_symbolic(table, g, n)
    elif method == "sampled":
        from .sampling import solve_sampled

        W = solve_sampled(table, g, n, seed=seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    table.store(g, n, W, method, time.perf_counter() - t0)
    if check:
        bad = pole_violations(to_w_form(table, g, n))
        if bad:
            raise LoopSolverError(f"w_{g},{n} has poles outside z=0, -3/2: {bad}")
    nd, dd = W.total_degree()
    log.info("solved (%d,%d) [%s] in %.2fs, degrees num %d den %d",
             g, n, method, table.timings[(g, n)], nd, dd)
    return W


def solve_all(chi_max: int = 4, genus_offset: int = GENUS_OFFSET, check: bool = True,
              table: ResolventTable | None = None, method: str = "auto") -> ResolventTable:
    table = table or ResolventTable(genus_offset)
    for g, n in schedule(chi_max):
        if (g, n) not in table:
            solve_wgn(table, g, n, check=check, method=method)
    return table


def prerequisites(targets: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Scheduled entries any target can depend on: (g', n') with g' <= g and
    n' <= n + g - g' (each lost handle frees at most one extra point).  The set
    is closed under the same rule."""
    chi = max(complexity(g, n) for g, n in targets)
    return [(h, m) for h, m in schedule(chi)
            if any(h <= g and m <= n + g - h for g, n in targets)]


def solve_through(targets: Sequence[tuple[int, int]], genus_offset: int = GENUS_OFFSET,
                  check: bool = True, method: str = "auto") -> ResolventTable:
    """Solve just enough of the schedule to contain every target (g, n)."""
    table = ResolventTable(genus_offset)
    for g, n in prerequisites(targets):
        solve_wgn(table, g, n, check=check, method=method)
    return table


def to_w_form(table: ResolventTable, g: int, n: int, tilde: bool = False) -> RationalFunc:
    """w_{g,n} = W^z_{g,n} prod x'(z_i), plus x'1 x'2/(x1-x2)^2 for (0,2)
    unless ``tilde`` is set."""
    ring = table.ring(n)
    f = table[(g, n)]
    for i in range(n):
        f = f * ring.xp[i]
    if (g, n) == (0, 2) and not tilde:
        f = f + ring.xp[0] * ring.xp[1] / (ring.x[0] - ring.x[1]) ** 2
    return f


def pole_violations(w: RationalFunc) -> list[str]:
    """Denominator factors other than z_i and 2 z_i + 3."""
    bad = []
    for fac, _ in w.factor_den():
        terms = fac.terms
        if fac.total_degree() != 1 or len(terms) > 2:
            bad.append(fac.to_text())
            continue
        lin = [e for e in terms if sum(e) == 1]
        const = terms.get((0,) * len(fac.variables), 0)
        c = terms[lin[0]]
        if const != 0 and const / c != 1.5:
            bad.append(fac.to_text())
    return bad


def numerator_positive(w: RationalFunc) -> bool:
    return all(c > 0 for c in w.num.terms.values())


def is_symmetric(f: RationalFunc) -> bool:
    n = len(f.variables)
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        if not f.equals(f.remap(perm, f.variables)):
            return False
    return True


@dataclass
class PoleReport:
    g: int
    n: int
    confined: bool
    violations: list = field(default_factory=list)
    positive_numerator: bool = False
    symmetric: bool = False
    numerator_degree: int = 0
    seconds: float = 0.0
    method: str = ""

    def to_json(self) -> dict:
        return dict(self.__dict__)


def property_report(table: ResolventTable) -> list[PoleReport]:
    out = []
    for (g, n) in sorted(table.keys(), key=lambda gn: (complexity(*gn), gn[1])):
        if complexity(g, n) <= 0:
            continue
        w = to_w_form(table, g, n)
        bad = pole_violations(w)
        out.append(PoleReport(g, n, not bad, bad, numerator_positive(w), is_symmetric(table[(g, n)]),
                              w.num.total_degree(), table.timings.get((g, n), 0.0),
                              table.methods.get((g, n), "")))
    return out
