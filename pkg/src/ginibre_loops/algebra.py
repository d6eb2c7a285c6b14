"""Exact arithmetic over Q: sparse multivariate polynomials, reduced rational
functions, and Laurent expansions.

Coefficients are :class:`fractions.Fraction` at the API surface.  Internally the
polynomials live in FLINT (``python-flint``) which gives exact arbitrary
precision arithmetic and a fast multivariate gcd.  Every variable tuple gets
its own FLINT context with graded-lexicographic order, first variable largest.

Canonical form of a :class:`RationalFunc`: numerator and denominator have
integer coefficients, share no common factor (integer content included) and
the denominator's leading coefficient is positive.  Equality is nevertheless
decided by cross-multiplication (skipped when the denominators are identical),
so it never depends on the gcd.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

import flint

BigRational = Fraction

#: Marker for the point at infinity in :func:`laurent_at`.
INFINITY = "oo"

#: Largest pole order accepted by :func:`laurent_at` / :func:`residue_at`.
MAX_POLE_ORDER = 64

Scalar = Union[int, Fraction]


@functools.lru_cache(maxsize=None)
def _zctx(variables: tuple[str, ...]):
    return flint.fmpz_mpoly_ctx.get(variables, "deglex")


@functools.lru_cache(maxsize=None)
def _qctx(variables: tuple[str, ...]):
    return flint.fmpq_mpoly_ctx.get(variables, "deglex")


def _to_fraction(c) -> Fraction:
    if isinstance(c, flint.fmpz):
        return Fraction(int(c))
    if isinstance(c, flint.fmpq):
        return Fraction(int(c.p), int(c.q))
    return Fraction(c)


def _fmpq(c: Scalar) -> flint.fmpq:
    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


def _q_to_z(q) -> tuple[object, int]:
    """Split an fmpq polynomial as (integer polynomial, positive denominator)."""
    d = 1
    items = q.to_dict()
    for c in items.values():
        d = lcm(d, int(c.q))
    ctx = _zctx(tuple(q.context().names()))
    z = ctx.from_dict({e: int(c.p) * (d // int(c.q)) for e, c in items.items()})
    return z, d


def _z_to_q(z):
    ctx = _qctx(tuple(z.context().names()))
    return ctx.from_dict({e: int(c) for e, c in z.to_dict().items()})


def _check_same(a_vars: Sequence[str], b_vars: Sequence[str]) -> None:
    if tuple(a_vars) != tuple(b_vars):
        raise ValueError(
            f"variable mismatch {tuple(a_vars)} vs {tuple(b_vars)}; align() first"
        )


def _term_key(e: Sequence[int]) -> tuple[int, ...]:
    # grlex key, first variable largest
    return (sum(e), *e)


# ---------------------------------------------------------------------------
# MultiPoly
# ---------------------------------------------------------------------------


class MultiPoly:
    """Immutable sparse polynomial over Q in an ordered tuple of variables."""

    __slots__ = ("variables", "_q")

    def __init__(self, variables: Iterable[str], terms: Mapping | None = None):
        variables = tuple(variables)
        ctx = _qctx(variables)
        data = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != len(variables) or min(e, default=0) < 0:
                raise ValueError(f"bad exponent vector {e} for {variables}")
            if c:
                data[e] = _fmpq(c)
        self.variables = variables
        self._q = ctx.from_dict(data)

    @classmethod
    def _wrap(cls, variables: tuple[str, ...], q) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._q = q
        return obj

    @classmethod
    def constant(cls, variables: Iterable[str], c: Scalar) -> "MultiPoly":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def gen(cls, variables: Iterable[str], name: str) -> "MultiPoly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def gens(cls, variables: Iterable[str]) -> tuple["MultiPoly", ...]:
        variables = tuple(variables)
        return tuple(cls.gen(variables, v) for v in variables)

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return {tuple(int(v) for v in e): _to_fraction(c) for e, c in self._q.to_dict().items()}

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in descending graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: _term_key(t[0]), reverse=True)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            _check_same(self.variables, other.variables)
            return other
        if isinstance(other, (int, Rational)):
            return MultiPoly.constant(self.variables, Fraction(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return MultiPoly._wrap(self.variables, self._q + other._q)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return MultiPoly._wrap(self.variables, self._q - other._q)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return MultiPoly._wrap(self.variables, self._q * other._q)

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly._wrap(self.variables, -self._q)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        return MultiPoly._wrap(self.variables, self._q ** k)

    def divexact(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient ``self / other``; raises ArithmeticError when not exact."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        try:
            q = self._q / other._q
        except Exception as exc:  # flint DomainError
            raise ArithmeticError(f"inexact division: {exc}") from None
        return MultiPoly._wrap(self.variables, q)

    def __eq__(self, other):
        if isinstance(other, (int, Rational)):
            other = MultiPoly.constant(self.variables, Fraction(other))
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.variables == other.variables and self._q == other._q

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return self._q.is_zero()

    def __bool__(self):
        return not self.is_zero()

    # -- structure ------------------------------------------------------------

    def total_degree(self) -> int:
        return -1 if self.is_zero() else int(self._q.total_degree())

    def degree(self, var: str) -> int:
        if self.is_zero():
            return -1
        return int(self._q.degrees()[self.variables.index(var)])

    def leading_coefficient(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return self.sorted_terms()[0][1]

    def diff(self, var: str) -> "MultiPoly":
        if var not in self.variables:
            raise ValueError(f"unknown variable {var!r}")
        return MultiPoly._wrap(self.variables, self._q.derivative(var))

    def align(self, variables: Iterable[str]) -> "MultiPoly":
        """Embed into a (super)set of variables, reordering as requested."""
        variables = tuple(variables)
        missing = set(self.variables) - set(variables)
        if missing:
            raise ValueError(f"cannot align: {sorted(missing)} not in target")
        gens = _qctx(variables).gens()
        q = self._q.compose(*[gens[variables.index(v)] for v in self.variables],
                            ctx=_qctx(variables))
        return MultiPoly._wrap(variables, q)

    def __call__(self, *values):
        """Evaluate at numbers (Fractions/ints give exact results)."""
        if len(values) != len(self.variables):
            raise ValueError("wrong number of values")
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v ** k
            total = total + t
        return total

    def to_integer(self) -> tuple["MultiPoly", int]:
        z, d = _q_to_z(self._q)
        return MultiPoly._wrap(self.variables, _z_to_q(z)), d

    # -- output -------------------------------------------------------------

    def to_text(self, unicode: bool = False) -> str:
        return _poly_text(self.variables, self.sorted_terms(), unicode)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.variables}, {self.to_text()!r})"

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "terms": [[list(e), _frac_str(c)] for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        variables = tuple(data["variables"])
        return cls(variables, {tuple(e): Fraction(c) for e, c in data["terms"]})


def _frac_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def _superscript(k: int) -> str:
    return str(k).translate(str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹"))


def _pretty_var(name: str, unicode: bool) -> str:
    if unicode and name[-1:].isdigit():
        head = name.rstrip("0123456789")
        digits = name[len(head):]
        return head + digits.translate(str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉"))
    return name


def _poly_text(variables, items, unicode=False) -> str:
    if not items:
        return "0"
    parts = []
    for e, c in items:
        mono = []
        for v, k in zip(variables, e):
            if k == 0:
                continue
            name = _pretty_var(v, unicode)
            if k == 1:
                mono.append(name)
            else:
                mono.append(name + _superscript(k) if unicode else f"{name}^{k}")
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if mono:
            coef = "" if a == 1 else f"{a}*" if not unicode else f"{a}"
            body = coef + ("*" if not unicode else "").join(mono)
        else:
            body = str(a)
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    """``op`` in {"add", "sub", "mul"}; operands must share variable order."""
    _check_same(a.variables, b.variables)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def _rational_content(p: MultiPoly) -> Fraction:
    """Positive rational content: gcd of numerators over lcm of denominators."""
    num, den = 0, 1
    for c in p.terms.values():
        num = gcd(num, c.numerator)
        den = lcm(den, c.denominator)
    return Fraction(num, den)


def poly_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Greatest common divisor, normalised to positive leading coefficient.

    The rational content of the result is the gcd of the two contents, so for
    integer inputs this is the usual gcd over Z[z] (``gcd(6z, 4z^2) = 2z``).
    """
    _check_same(a.variables, b.variables)
    if a.is_zero() and b.is_zero():
        return a
    if a.is_zero() or b.is_zero():
        p = b if a.is_zero() else a
        c = _rational_content(p)
        prim = p * (1 / c)
        return prim if prim.leading_coefficient() > 0 else -prim
    ca, cb = _rational_content(a), _rational_content(b)
    za, _ = _q_to_z((a * (1 / ca))._q)
    zb, _ = _q_to_z((b * (1 / cb))._q)
    g = za.gcd(zb)
    content = Fraction(gcd(ca.numerator, cb.numerator), lcm(ca.denominator, cb.denominator))
    out = MultiPoly._wrap(a.variables, _z_to_q(g)) * content
    return out if out.leading_coefficient() > 0 else -out


# ---------------------------------------------------------------------------
# RationalFunc
# ---------------------------------------------------------------------------


def _leading_sign(z) -> int:
    """Sign of the leading coefficient of an fmpz polynomial under grlex
    (the contexts use FLINT's deglex order, which is the same order)."""
    if z.is_zero():
        return 0
    return 1 if z.leading_coefficient() > 0 else -1


class RationalFunc:
    """Reduced quotient of two integer polynomials in the same variables."""

    __slots__ = ("variables", "_n", "_d")

    def __init__(self, num, den=None, variables: Iterable[str] | None = None):
        if isinstance(num, MultiPoly):
            variables = num.variables
        elif isinstance(den, MultiPoly):
            variables = den.variables
        elif variables is None:
            raise ValueError("variables required for scalar rational functions")
        variables = tuple(variables)
        num = num if isinstance(num, MultiPoly) else MultiPoly.constant(variables, num)
        den = MultiPoly.constant(variables, 1) if den is None else den
        den = den if isinstance(den, MultiPoly) else MultiPoly.constant(variables, den)
        _check_same(num.variables, den.variables)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        zn, dn = _q_to_z(num._q)
        zd, dd = _q_to_z(den._q)
        # num/den = (zn/dn)/(zd/dd) = zn*dd / (zd*dn)
        obj = RationalFunc._make(variables, zn * dd, zd * dn)
        self.variables = variables
        self._n, self._d = obj._n, obj._d

    @classmethod
    def _make(cls, variables, n, d, reduce: bool = True) -> "RationalFunc":
        if d.is_zero():
            raise ZeroDivisionError("zero denominator")
        if n.is_zero():
            d = d.context().constant(1)
        elif reduce:
            g = n.gcd(d)
            if not g.is_one():
                n = n / g
                d = d / g
        if _leading_sign(d) < 0:
            n, d = -n, -d
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._n = n
        obj._d = d
        return obj

    @classmethod
    def constant(cls, variables: Iterable[str], c: Scalar) -> "RationalFunc":
        variables = tuple(variables)
        c = Fraction(c)
        ctx = _zctx(variables)
        return cls._make(variables, ctx.constant(c.numerator), ctx.constant(c.denominator))

    @classmethod
    def gen(cls, variables: Iterable[str], name: str) -> "RationalFunc":
        variables = tuple(variables)
        ctx = _zctx(variables)
        return cls._make(variables, ctx.gens()[variables.index(name)], ctx.constant(1), False)

    @classmethod
    def gens(cls, variables: Iterable[str]) -> tuple["RationalFunc", ...]:
        variables = tuple(variables)
        return tuple(cls.gen(variables, v) for v in variables)

    @property
    def num(self) -> MultiPoly:
        return MultiPoly._wrap(self.variables, _z_to_q(self._n))

    @property
    def den(self) -> MultiPoly:
        return MultiPoly._wrap(self.variables, _z_to_q(self._d))

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalFunc):
            _check_same(self.variables, other.variables)
            return other
        if isinstance(other, MultiPoly):
            return RationalFunc(other)
        if isinstance(other, (int, Rational)):
            return RationalFunc.constant(self.variables, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self._n.is_zero():
            return other
        if other._n.is_zero():
            return self
        if self._d == other._d:
            return RationalFunc._make(self.variables, self._n + other._n, self._d)
        g = self._d.gcd(other._d)
        a = other._d / g
        b = self._d / g
        return RationalFunc._make(self.variables, self._n * a + other._n * b, self._d * a)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunc._make(self.variables, -self._n, self._d, False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self._n.is_zero() or other._n.is_zero():
            return RationalFunc.constant(self.variables, 0)
        g1 = self._n.gcd(other._d)
        g2 = other._n.gcd(self._d)
        n = (self._n / g1) * (other._n / g2)
        d = (self._d / g2) * (other._d / g1)
        return RationalFunc._make(self.variables, n, d, False)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunc":
        if self._n.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunc._make(self.variables, self._d, self._n, False)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunc._make(self.variables, self._n ** k, self._d ** k, False)

    # -- comparison -----------------------------------------------------------

    def equals(self, other) -> bool:
        """Cross-multiplication equality: a/b == c/d iff a*d - c*b == 0."""
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        if self._d == other._d:
            # a/b == c/b iff a == c; skips the large products on reduced inputs
            return self._n == other._n
        return (self._n * other._d - other._n * self._d).is_zero()

    def __eq__(self, other):
        if not isinstance(other, (RationalFunc, MultiPoly, int, Rational)):
            return NotImplemented
        if isinstance(other, (RationalFunc, MultiPoly)) and other.variables != self.variables:
            return False
        return self.equals(other)

    def __hash__(self):
        return hash((self.variables, str(self._n), str(self._d)))

    def is_zero(self) -> bool:
        return self._n.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_polynomial(self) -> bool:
        return self._d.is_constant()

    # -- calculus / substitution ------------------------------------------------

    def diff(self, var: str) -> "RationalFunc":
        if var not in self.variables:
            raise ValueError(f"unknown variable {var!r}")
        n, d = self._n, self._d
        dn = n.derivative(var)
        dd = d.derivative(var)
        if dd.is_zero():
            return RationalFunc._make(self.variables, dn, d)
        # (n'd - nd')/d^2; cancel gcd(d, d') first to keep sizes down
        g = d.gcd(dd)
        dg = d / g
        return RationalFunc._make(self.variables, dn * dg - n * (dd / g), d * dg)

    def remap(self, targets: Sequence[int], variables: Iterable[str]) -> "RationalFunc":
        """Send variable ``i`` to target variable ``targets[i]`` (renaming,
        embedding, or diagonal identification when targets repeat)."""
        variables = tuple(variables)
        if len(targets) != len(self.variables):
            raise ValueError("one target per variable required")
        ctx = _zctx(variables)
        gens = ctx.gens()
        imgs = [gens[t] for t in targets]
        if self.variables:
            n = self._n.compose(*imgs, ctx=ctx)
            d = self._d.compose(*imgs, ctx=ctx)
        else:
            n = ctx.from_dict({(0,) * len(variables): int(self._n.to_dict().get((), 0))})
            d = ctx.from_dict({(0,) * len(variables): int(self._d.to_dict()[()])})
        if d.is_zero():
            raise ZeroDivisionError("substitution makes the denominator vanish")
        reduce = len(set(targets)) < len(targets)
        return RationalFunc._make(variables, n, d, reduce)

    def substitute(self, bindings: Mapping[str, "RationalFunc"]) -> "RationalFunc":
        return rf_substitute(self, bindings)

    def __call__(self, *values):
        n = self.num(*values)
        d = self.den(*values)
        if d == 0:
            raise ZeroDivisionError("evaluation at a pole")
        if isinstance(n, (int, Fraction)) and isinstance(d, (int, Fraction)):
            return Fraction(n) / Fraction(d)
        return n / d

    def total_degree(self) -> tuple[int, int]:
        return int(self._n.total_degree()), int(self._d.total_degree())

    def factor_den(self) -> list[tuple[MultiPoly, int]]:
        """Irreducible factors of the denominator with multiplicities."""
        _, facs = self._d.factor()
        return [(MultiPoly._wrap(self.variables, _z_to_q(f)), int(k)) for f, k in facs]

    # -- output ---------------------------------------------------------------

    def to_text(self, unicode: bool = False, factor_den: bool = True) -> str:
        num = self.num.to_text(unicode)
        if self.is_polynomial():
            c = _to_fraction(self._d.leading_coefficient())
            return num if c == 1 else f"({num})/{c}"
        if factor_den:
            content, facs = self._d.factor()
            pieces = [] if content == 1 else [str(int(content))]
            for f, k in sorted(facs, key=lambda fk: str(fk[0])):
                body = MultiPoly._wrap(self.variables, _z_to_q(f)).to_text(unicode)
                if len(f.to_dict()) > 1:
                    body = f"({body})"
                if k > 1:
                    body = body + _superscript(k) if unicode else f"{body}^{k}"
                pieces.append(body)
            den = (" " if unicode else "*").join(pieces)
            if len(pieces) > 1:
                den = f"({den})"
        else:
            den = self.den.to_text(unicode)
            if len(self.den.terms) > 1:
                den = f"({den})"
        if len(self.num.terms) > 1:
            num = f"({num})"
        return f"{num}/{den}"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"RationalFunc({self.variables}, {self.to_text(factor_den=False)!r})"

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "num": self.num.to_json()["terms"],
            "den": self.den.to_json()["terms"],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RationalFunc":
        variables = tuple(data["variables"])
        num = MultiPoly.from_json({"variables": variables, "terms": data["num"]})
        den = MultiPoly.from_json({"variables": variables, "terms": data["den"]})
        return cls(num, den)


def rf_sum(terms: Iterable[RationalFunc], variables: Iterable[str] | None = None) -> RationalFunc:
    """Sum of many rational functions with a single final reduction.

    The denominators are merged into their lcm (gcds of denominators only),
    numerators are accumulated as polynomials, and one gcd with the lcm
    brings the result to canonical form.
    """
    terms = [t for t in terms if not t.is_zero()]
    if not terms:
        if variables is None:
            raise ValueError("variables required for an empty sum")
        return RationalFunc.constant(variables, 0)
    vs = terms[0].variables
    for t in terms:
        _check_same(t.variables, vs)
    L = terms[0]._d
    for t in terms[1:]:
        if t._d != L:
            g = L.gcd(t._d)
            L = L * (t._d / g)
    N = L.context().constant(0)
    for t in terms:
        N = N + (t._n if t._d == L else t._n * (L / t._d))
    return RationalFunc._make(vs, N, L)


def rf_product(factors: Iterable[RationalFunc], variables: Iterable[str] | None = None) -> RationalFunc:
    """Product of rational functions, reduced once at the end."""
    factors = list(factors)
    if not factors:
        if variables is None:
            raise ValueError("variables required for an empty product")
        return RationalFunc.constant(variables, 1)
    vs = factors[0].variables
    n, d = factors[0]._n, factors[0]._d
    for f in factors[1:]:
        _check_same(f.variables, vs)
        n = n * f._n
        d = d * f._d
    return RationalFunc._make(vs, n, d)


def rf_reduce(f: RationalFunc) -> RationalFunc:
    """Canonical form (already maintained by construction; re-derived here)."""
    return RationalFunc(f.num, f.den)


def rf_diff(f: RationalFunc, var: str) -> RationalFunc:
    return f.diff(var)


def rf_substitute(f: RationalFunc, bindings: Mapping[str, RationalFunc]) -> RationalFunc:
    """Compose ``f`` with rational functions, one per variable of ``f``.

    All bindings must share one variable tuple (the variables of the result).
    """
    missing = set(f.variables) - set(bindings)
    if missing:
        raise ValueError(f"no binding for {sorted(missing)}")
    imgs = [bindings[v] for v in f.variables]
    if not imgs:
        raise ValueError("nothing to substitute")
    out_vars = imgs[0].variables
    for b in imgs:
        _check_same(b.variables, out_vars)
    nd = {}
    for idx, v in enumerate(f.variables):
        nd[v] = max(f.num.degree(v), f.den.degree(v), 0)
    ctx = _zctx(out_vars)

    def homogenised(poly_terms):
        # sum c * prod p_v^e q_v^(D_v - e): a polynomial in the target ring
        total = ctx.constant(0)
        pcache: dict = {}
        for e, c in poly_terms.items():
            t = ctx.constant(1)
            for i, v in enumerate(f.variables):
                k = e[i]
                key = (v, k)
                if key not in pcache:
                    pcache[key] = imgs[i]._n ** k * imgs[i]._d ** (nd[v] - k)
                t = t * pcache[key]
            total = total + t * int(c)
        return total

    n = homogenised(f._n.to_dict())
    d = homogenised(f._d.to_dict())
    if d.is_zero():
        raise ZeroDivisionError("substitution produces an identically zero denominator")
    return RationalFunc._make(out_vars, n, d)


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentSeries:
    """``sum(coefficients[j] * t**(lowest_order + j)) + O(t**order)`` where
    ``t = z - point`` (or ``t = 1/z`` at infinity)."""

    point: object
    lowest_order: int
    coefficients: tuple[Fraction, ...]
    order: int

    def coefficient(self, k: int) -> Fraction:
        if k >= self.order:
            raise IndexError(f"coefficient {k} beyond truncation O(t^{self.order})")
        j = k - self.lowest_order
        if j < 0:
            return Fraction(0)
        return self.coefficients[j]

    def derivative(self) -> "LaurentSeries":
        """Term-by-term d/dt (only meaningful for finite expansion points)."""
        coeffs = tuple((self.lowest_order + j) * c for j, c in enumerate(self.coefficients))
        return LaurentSeries(self.point, self.lowest_order - 1, coeffs, self.order - 1)


def _series_quotient(num: list, den: list, count: int) -> list:
    """First ``count`` coefficients of num/den as power series (den[0] != 0)."""
    d0 = den[0]
    out = []
    for k in range(count):
        acc = num[k] if k < len(num) else 0
        for j in range(1, min(k, len(den) - 1) + 1):
            acc = acc - den[j] * out[k - j]
        out.append(Fraction(acc) / d0)
    return out


def _taylor_shift(coeffs: list, p: Fraction) -> list:
    """Coefficients of P(t + p) given those of P(z) (lowest degree first)."""
    out = [Fraction(c) for c in coeffs]
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] += p * out[j + 1]
    return out


def _univariate_coeffs(z) -> list:
    items = z.to_dict()
    deg = max((e[0] for e in items), default=0)
    out = [0] * (deg + 1)
    for e, c in items.items():
        out[e[0]] = int(c)
    return out


def laurent_at(f: RationalFunc, point, order: int) -> LaurentSeries:
    """Laurent expansion of a univariate rational function up to ``O(t^order)``.

    ``point`` is a rational number or :data:`INFINITY`.
    """
    if len(f.variables) != 1:
        raise ValueError("laurent_at expects a univariate rational function")
    num = _univariate_coeffs(f._n)
    den = _univariate_coeffs(f._d)
    if point == INFINITY:
        # f(1/t) = t^(deg D - deg N) * rev(N)(t) / rev(D)(t)
        shift = (len(den) - 1) - (len(num) - 1)
        num = [Fraction(c) for c in reversed(num)]
        den = [Fraction(c) for c in reversed(den)]
    else:
        p = Fraction(point)
        num = _taylor_shift(num, p)
        den = _taylor_shift(den, p)
        shift = 0
    m = 0
    while den[m] == 0:
        m += 1
    if m > MAX_POLE_ORDER:
        raise ValueError(f"pole order {m} exceeds bound {MAX_POLE_ORDER}")
    den = den[m:]
    lowest = shift - m
    # trim leading zeros of the numerator so lowest_order is the true valuation
    k0 = 0
    while k0 < len(num) and num[k0] == 0:
        k0 += 1
    if k0 == len(num):
        return LaurentSeries(point, order, (), order)
    lowest += k0
    num = num[k0:]
    count = max(order - lowest, 0)
    coeffs = _series_quotient(num, den, count)
    return LaurentSeries(point, lowest, tuple(coeffs), order)


def residue_at(f: RationalFunc, var: str, point) -> RationalFunc:
    """Coefficient of ``(var - point)^-1`` as a function of the other variables."""
    if var not in f.variables:
        raise ValueError(f"unknown variable {var!r}")
    p = Fraction(point)
    rest = tuple(v for v in f.variables if v != var)
    i = f.variables.index(var)
    work_vars = rest + ("_t",)
    qctx = _qctx(work_vars)
    gens = qctx.gens()
    imgs = []
    j = 0
    for k, v in enumerate(f.variables):
        if k == i:
            imgs.append(gens[-1] + _fmpq(p))
        else:
            imgs.append(gens[j])
            j += 1
    num = _z_to_q(f._n).compose(*imgs, ctx=qctx)
    den = _z_to_q(f._d).compose(*imgs, ctx=qctx)

    def split(q):
        parts: dict[int, dict] = {}
        for e, c in q.to_dict().items():
            parts.setdefault(e[-1], {})[e[:-1]] = c
        rctx = _qctx(rest)
        return {k: rctx.from_dict(v) for k, v in parts.items()}

    nparts = split(num)
    dparts = split(den)
    m = min(dparts)
    if m > MAX_POLE_ORDER:
        raise ValueError(f"pole order {m} exceeds bound {MAX_POLE_ORDER}")
    if m == 0:
        return RationalFunc.constant(rest, 0)
    rctx = _qctx(rest)
    zero = rctx.from_dict({})
    D = [dparts.get(m + k, zero) for k in range(m)]
    N = [nparts.get(k, zero) for k in range(m)]
    d0 = D[0]
    # S_k = s_k * d0^(k+1), with s the series of N/D.
    S = []
    d0pow = [rctx.constant(1)]
    for k in range(m):
        d0pow.append(d0pow[-1] * d0)
    for k in range(m):
        acc = N[k] * d0pow[k]
        for jj in range(1, k + 1):
            if not D[jj].is_zero():
                acc = acc - D[jj] * S[k - jj] * d0pow[jj - 1]
        S.append(acc)
    return RationalFunc(MultiPoly._wrap(rest, S[m - 1]), MultiPoly._wrap(rest, d0pow[m]))
