"""Sampled route for W_{g,n}: exact values on slices, exact reconstruction.

The spectators ``z_2..z_n`` are pinned to distinct positive integers while
``z_1`` stays symbolic, so every quantity is a univariate rational function.
Derivatives in a spectator slot only ever occur to first order, and in at
most two slots at once, so spectators carry square-free first-order jets
(``eps_s^2 = 0``).  One slice yields ``W_{g,n}(z_1; a)`` exactly.

Reconstruction uses the structure of the answer: ``w_{g,n}`` times
``prod z_i^alpha (2 z_i + 3)^beta`` is a polynomial ``P`` symmetric in all
variables.  Its coefficient of ``z_1^k`` is symmetric in the spectators with
degree at most ``d`` per variable, hence a combination of products
``e_mu = prod_j e_{mu_j}`` of elementary symmetric polynomials with at most
``d`` factors.  The coefficients come from an exact linear solve over Q.
The result is then checked on fresh slices and for full symmetry, both exact
comparisons; a wrong ansatz cannot pass them except on a measure-zero set of
sample points.
"""
from __future__ import annotations

import itertools
import logging
import random
import time
from fractions import Fraction
from typing import Sequence

import flint

from .algebra import MultiPoly, RationalFunc, _zctx, _qctx
from .curve import build_curve
from .loops import (LoopSolverError, ResolventTable, assemble, is_symmetric, zvars)

log = logging.getLogger(__name__)

UVARS = ("z1",)


def _u_const(c) -> RationalFunc:
    return RationalFunc.constant(UVARS, c)


class Jet:
    """sum_T c_T eps^T over square-free monomials T (frozensets of slots)."""

    __slots__ = ("c",)

    def __init__(self, coeffs: dict):
        self.c = {k: v for k, v in coeffs.items() if not v.is_zero()}

    @staticmethod
    def lift(v) -> "Jet":
        if isinstance(v, Jet):
            return v
        if isinstance(v, RationalFunc):
            return Jet({frozenset(): v})
        return Jet({frozenset(): _u_const(v)})

    def value(self) -> RationalFunc:
        return self.c.get(frozenset(), _u_const(0))

    def support(self) -> frozenset:
        out = frozenset()
        for k in self.c:
            out |= k
        return out

    def __add__(self, other):
        other = Jet.lift(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out[k] + v if k in out else v
        return Jet(out)

    __radd__ = __add__

    def __neg__(self):
        return Jet({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-Jet.lift(other))

    def __rsub__(self, other):
        return Jet.lift(other) + (-self)

    def __mul__(self, other):
        other = Jet.lift(other)
        out: dict = {}
        for ka, va in self.c.items():
            for kb, vb in other.c.items():
                if ka & kb:
                    continue
                k = ka | kb
                p = va * vb
                out[k] = out[k] + p if k in out else p
        return Jet(out)

    __rmul__ = __mul__

    def inverse(self) -> "Jet":
        f0 = self.c.get(frozenset())
        if f0 is None or f0.is_zero():
            raise ZeroDivisionError("jet with vanishing value part")
        g0 = f0.inverse()
        sup = sorted(self.support())
        g = {frozenset(): g0}
        for r in range(1, len(sup) + 1):
            for S in itertools.combinations(sup, r):
                S = frozenset(S)
                acc = _u_const(0)
                for t in range(1, r + 1):
                    for T in itertools.combinations(sorted(S), t):
                        T = frozenset(T)
                        fT = self.c.get(T)
                        gR = g.get(S - T)
                        if fT is not None and gR is not None:
                            acc = acc + fT * gR
                if not acc.is_zero():
                    g[S] = -(g0 * acc)
        return Jet(g)

    def __truediv__(self, other):
        return self * Jet.lift(other).inverse()

    def __rtruediv__(self, other):
        return Jet.lift(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Jet.lift(1)
        for _ in range(k):
            out = out * self
        return out


class DerivativeCache:
    """Partial derivatives of stored numerators and denominators, keyed by the
    (g, m) entry and the tuple of differentiated positions."""

    def __init__(self, table: ResolventTable):
        self.table = table
        self._d: dict = {}

    def get(self, g: int, m: int, positions: tuple[int, ...]):
        key = (g, m, positions)
        hit = self._d.get(key)
        if hit is None:
            f = self.table[(g, m)]
            N, D = f._n, f._d
            for p in positions:
                N = N.derivative(p)
                D = D.derivative(p)
            hit = (N, D)
            self._d[key] = hit
        return hit


class SampledBackend:
    """Assembly on the slice z_s = point[s] (s >= 1), z_1 symbolic."""

    def __init__(self, table: ResolventTable, n: int, point: Sequence[int], cache: DerivativeCache):
        if len(point) != n - 1 or len(set(point)) != n - 1 or min(point, default=1) < 1:
            raise ValueError("need n-1 distinct positive integers")
        self.table = table
        self.n = n
        self.a = {s: int(v) for s, v in zip(range(1, n), point)}
        self.cache = cache
        self.active: frozenset = frozenset()
        curve = build_curve("z")
        self.X1 = curve.x_of_z.remap([0], UVARS)
        self.XP1 = curve.xprime_of_z.remap([0], UVARS)
        self.xs = {s: curve.x_of_z(Fraction(v)) for s, v in self.a.items()}
        self.xps = {s: curve.xprime_of_z(Fraction(v)) for s, v in self.a.items()}
        self._memo: dict = {}
        self._uctx = _zctx(UVARS)

    # -- backend interface --------------------------------------------------

    def focus(self, *spectators: int):
        backend = self

        class _Focus:
            def __enter__(self_inner):
                self_inner.saved = backend.active
                backend.active = frozenset(spectators)

            def __exit__(self_inner, *exc):
                backend.active = self_inner.saved
                return False

        return _Focus()

    def x(self, i: int) -> Jet:
        if i == 0:
            return Jet({frozenset(): self.X1})
        c = {frozenset(): _u_const(self.xs[i])}
        if i in self.active:
            c[frozenset([i])] = _u_const(self.xps[i])
        return Jet(c)

    def const(self, c) -> Jet:
        return Jet.lift(c)

    def D(self, f: Jet, i: int) -> Jet:
        if i == 0:
            return Jet({k: v.diff("z1") / self.XP1 for k, v in f.c.items()})
        if i not in self.active:
            raise LoopSolverError(f"derivative in slot {i} outside the focused jet variables")
        inv = 1 / self.xps[i]
        return Jet({k - {i}: v * inv for k, v in f.c.items() if i in k})

    def diff_quotient(self, numerator: Jet, i: int, j: int) -> Jet:
        out = numerator / (self.x(i) - self.x(j))
        if i == 0 and j != 0:
            # the diagonal factor z_1 - a_j may not survive; the deck factors of
            # x(z_1) - x(a_j) may, as in the symbolic route
            lin = self._uctx.gens()[0] - self.a[j]
            for v in out.c.values():
                if not v._d.gcd(lin).is_constant():
                    raise LoopSolverError(f"divided difference in slots {i},{j} left a pole")
        return out

    def at(self, g: int, slots: Sequence[int]) -> Jet:
        slots = tuple(slots)
        act = tuple(sorted(s for s in set(slots) if s and s in self.active))
        key = (g, slots, act)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        m = len(slots)
        if (g, m) not in self.table:
            raise LoopSolverError(f"missing prerequisite W_{(g, m)}")
        u = self._uctx
        z1 = u.gens()[0]
        images = [z1 if s == 0 else u.constant(self.a[s]) for s in slots]
        # a spectator repeated in several slots differentiates each of them
        posmap = {s: [p for p, t in enumerate(slots) if t == s] for s in act}
        numj: dict = {}
        denj: dict = {}
        for r in range(len(act) + 1):
            for T in itertools.combinations(act, r):
                nT = dT = None
                for choice in itertools.product(*(posmap[s] for s in T)):
                    N, D = self.cache.get(g, m, tuple(sorted(choice)))
                    nc = N.compose(*images, ctx=u)
                    dc = D.compose(*images, ctx=u)
                    nT = nc if nT is None else nT + nc
                    dT = dc if dT is None else dT + dc
                numj[frozenset(T)] = RationalFunc._make(UVARS, nT, u.constant(1), False)
                denj[frozenset(T)] = RationalFunc._make(UVARS, dT, u.constant(1), False)
        out = Jet(numj) / Jet(denj)
        self._memo[key] = out
        return out


def slice_value(table: ResolventTable, g: int, n: int, point: Sequence[int],
                cache: DerivativeCache | None = None) -> RationalFunc:
    """W^z_{g,n}(z_1; point) as a univariate rational function of z_1."""
    cache = cache or DerivativeCache(table)
    backend = SampledBackend(table, n, point, cache)
    known, coeff = assemble(backend, g, n, table.genus_offset)
    for jet in (known, coeff):
        if set(jet.c) - {frozenset()}:
            raise LoopSolverError("jet variables left over after assembly")
    c = coeff.value()
    if c.is_zero():
        raise LoopSolverError("unknown coefficient vanished on a slice")
    return -known.value() / c


def _xp_num(v: int) -> Fraction:
    return Fraction(v * v * (2 * v + 3), (1 + v) ** 2)


def _w_slice(W: RationalFunc, point: Sequence[int]) -> RationalFunc:
    curve = build_curve("z")
    w = W * curve.xprime_of_z.remap([0], UVARS)
    for v in point:
        w = w * _xp_num(v)
    return w


def _shape(w: RationalFunc) -> tuple[int, int, int]:
    """(alpha, beta, d): powers of z_1 and 2z_1+3 in the denominator and the
    numerator degree, raising if any other denominator factor appears."""
    alpha = beta = 0
    for fac, e in w.factor_den():
        t = fac.terms
        if t == {(1,): Fraction(1)}:
            alpha = e
        elif t == {(1,): Fraction(2), (0,): Fraction(3)}:
            beta = e
        else:
            raise LoopSolverError(f"slice has a pole outside z=0, -3/2: {fac.to_text()}")
    return alpha, beta, w.num.degree("z1")


def _basis(parts: int, max_len: int) -> list[tuple[int, ...]]:
    out = []
    for r in range(max_len + 1):
        out.extend(itertools.combinations_with_replacement(range(1, parts + 1), r))
    return out


def _elementary(values: Sequence[int]) -> list[int]:
    e = [1] + [0] * len(values)
    for v in values:
        for k in range(len(values), 0, -1):
            e[k] += e[k - 1] * v
    return e


def _row(basis, point) -> list[int]:
    e = _elementary(point)
    row = []
    for mu in basis:
        t = 1
        for j in mu:
            t *= e[j]
        row.append(t)
    return row


def _numerator_coeffs(w: RationalFunc, alpha: int, beta: int, d: int, point) -> list[Fraction]:
    (z,) = RationalFunc.gens(UVARS)
    scale = Fraction(1)
    for v in point:
        scale *= Fraction(v) ** alpha * Fraction(2 * v + 3) ** beta
    P = w * z ** alpha * (2 * z + 3) ** beta * scale
    if not P.is_polynomial():
        raise LoopSolverError("slice numerator is not a polynomial under the ansatz")
    poly = P.num * (1 / Fraction(P.den.leading_coefficient()))
    if poly.degree("z1") > d:
        raise LoopSolverError("slice numerator degree exceeds the ansatz")
    terms = poly.terms
    return [terms.get((k,), Fraction(0)) for k in range(d + 1)]


def _random_point(rng: random.Random, size: int, hi: int) -> tuple[int, ...]:
    return tuple(sorted(rng.sample(range(1, hi + 1), size)))


def solve_sampled(table: ResolventTable, g: int, n: int, seed: int = 0,
                  probes: int = 2, checks: int = 2) -> RationalFunc:
    if n < 2:
        raise ValueError("the sampled route needs at least one spectator")
    rng = random.Random(f"{seed}:{g}:{n}")
    cache = DerivativeCache(table)
    hi = 8 * n + 40
    used: set = set()

    def fresh():
        while True:
            p = _random_point(rng, n - 1, hi)
            if p not in used:
                used.add(p)
                return p

    slices: dict = {}
    alpha = beta = d = 0
    for _ in range(probes):
        p = fresh()
        w = _w_slice(slice_value(table, g, n, p, cache), p)
        slices[p] = w
        a, b, dd = _shape(w)
        alpha, beta, d = max(alpha, a), max(beta, b), max(d, dd)
    basis = _basis(n - 1, d)
    K = len(basis)
    log.debug("W_%d,%d ansatz alpha=%d beta=%d d=%d, %d unknowns per z_1 power", g, n, alpha, beta, d, K)
    t0 = time.perf_counter()
    rows, points = [], []
    for p in list(slices):
        rows.append(_row(basis, p))
        points.append(p)
    while len(points) < K:
        p = fresh()
        rows.append(_row(basis, p))
        points.append(p)
    M = flint.fmpq_mat(K, K, [v for r in rows[:K] for v in r])
    attempts = 0
    while M.rank() < K:
        attempts += 1
        if attempts > 5:
            raise LoopSolverError("could not find a unisolvent set of sample points")
        # replace the whole set; integer points in general position are generic
        rows, points = [], []
        while len(points) < K:
            p = fresh()
            rows.append(_row(basis, p))
            points.append(p)
        M = flint.fmpq_mat(K, K, [v for r in rows for v in r])
    rhs = []
    for p in points[:K]:
        if p not in slices:
            slices[p] = _w_slice(slice_value(table, g, n, p, cache), p)
        rhs.append(_numerator_coeffs(slices[p], alpha, beta, d, p))
    B = flint.fmpq_mat(K, d + 1, [flint.fmpq(c.numerator, c.denominator) for r in rhs for c in r])
    log.debug("%d slices in %.1fs", K, time.perf_counter() - t0)
    C = M.solve(B)
    t0 = time.perf_counter()
    W = _assemble_symbolic(C, basis, alpha, beta, d, n)
    log.debug("symbolic assembly in %.1fs", time.perf_counter() - t0)
    for _ in range(checks):
        p = fresh()
        got = slice_value(table, g, n, p, cache)
        want = W.remap([0], UVARS) if n == 1 else _restrict(W, p)
        if not got.equals(want):
            raise LoopSolverError(f"reconstruction of W_{g},{n} fails a fresh slice check")
    t0 = time.perf_counter()
    if not is_symmetric(W):
        raise LoopSolverError(f"reconstruction of W_{g},{n} is not symmetric")
    log.debug("fresh-slice and symmetry checks in %.1fs", time.perf_counter() - t0)
    return W


def _restrict(W: RationalFunc, point: Sequence[int]) -> RationalFunc:
    u = _zctx(UVARS)
    images = [u.gens()[0]] + [u.constant(v) for v in point]
    n = W._n.compose(*images, ctx=u)
    d = W._d.compose(*images, ctx=u)
    return RationalFunc._make(UVARS, n, d)


def _assemble_symbolic(C, basis, alpha: int, beta: int, d: int, n: int) -> RationalFunc:
    vs = zvars(n)
    q = _qctx(vs)
    gens = q.gens()
    spect = gens[1:]
    # elementary symmetric polynomials of the spectators
    e = [q.constant(1)]
    for k in range(1, n):
        acc = q.constant(0)
        for combo in itertools.combinations(spect, k):
            t = q.constant(1)
            for v in combo:
                t = t * v
            acc = acc + t
        e.append(acc)
    emu = []
    for mu in basis:
        t = q.constant(1)
        for j in mu:
            t = t * e[j]
        emu.append(t)
    P = q.constant(0)
    z1 = gens[0]
    for k in range(d + 1):
        coeff = q.constant(0)
        for r, t in enumerate(emu):
            c = C[r, k]
            if c != 0:
                coeff = coeff + t * c
        P = P + coeff * z1 ** k
    Pm = MultiPoly._wrap(vs, P)
    Dm = MultiPoly.constant(vs, 1)
    for i, v in enumerate(vs):
        zi = MultiPoly.gen(vs, v)
        Dm = Dm * zi ** alpha * (zi * 2 + 3) ** beta
    w = RationalFunc(Pm, Dm)
    curve = build_curve("z")
    for i in range(n):
        w = w / curve.xprime_of_z.remap([i], vs)
    return w
