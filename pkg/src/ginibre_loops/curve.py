"""The genus-zero spectral curve ``x^2 y^3 - x y + 1 = 0`` of the two-matrix
product ensemble, its rational uniformization, and the limiting density.

Everything exact is a :class:`~ginibre_loops.algebra.RationalFunc` in ``z``.
The deck maps, ``G(u)`` and the density involve radicals and are evaluated in
floating point only.

The curve has genus zero (its Newton polygon has no interior lattice point),
so a global rational parametrization exists; we simply hardcode it.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy import integrate

from .algebra import INFINITY, MultiPoly, RationalFunc, rf_substitute

EDGE = Fraction(27, 4)
RAMIFICATION = ((Fraction(0), Fraction(0), 2), (Fraction(-3, 2), EDGE, 1), (INFINITY, INFINITY, 1))


@dataclass(frozen=True)
class CurveData:
    x_of_z: RationalFunc
    y_of_z: RationalFunc
    sigma_of_z: RationalFunc
    xprime_of_z: RationalFunc
    ramification: tuple
    #: the physical sheet is the neighbourhood of z = -1, where x -> infinity
    #: and W_{0,1} = y ~ 1/x
    physical_point: Fraction = Fraction(-1)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.x_of_z.variables


def curve_polynomial() -> MultiPoly:
    """P(x, y) = x^2 y^3 - x y + 1."""
    return MultiPoly(("x", "y"), {(2, 3): 1, (1, 1): -1, (0, 0): 1})


@functools.lru_cache(maxsize=None)
def build_curve(var: str = "z") -> CurveData:
    (z,) = RationalFunc.gens((var,))
    x = z ** 3 / (1 + z)
    y = -(1 + z) / z ** 2
    sigma = (1 - 3 * x * y ** 2) / x
    xp = x.diff(var)
    return CurveData(x, y, sigma, xp, RAMIFICATION)


def check_curve(curve: CurveData) -> dict[str, bool]:
    """Structural identities of the parametrization."""
    P = RationalFunc(curve_polynomial())
    on_curve = rf_substitute(P, {"x": curve.x_of_z, "y": curve.y_of_z}).is_zero()
    x, y = curve.x_of_z, curve.y_of_z
    dPdy = RationalFunc(curve_polynomial().diff("y"))
    dPdy_z = rf_substitute(dPdy, {"x": x, "y": y})
    # with sigma = (1 - 3 x y^2)/x one has x^2 sigma = x - 3 x^2 y^2 = -dP/dy
    sigma_ok = (x ** 2 * curve.sigma_of_z + dPdy_z).is_zero()
    (zz,) = RationalFunc.gens(curve.variables)
    xp_ok = curve.xprime_of_z.equals(zz ** 2 * (2 * zz + 3) / (1 + zz) ** 2)
    return {"on_curve": on_curve, "sigma_is_minus_dPdy": sigma_ok, "xprime_factorization": xp_ok}


def w01(var: str = "z") -> RationalFunc:
    """w_{0,1}(z) = y(z) x'(z) = -(2z+3)/(1+z)."""
    c = build_curve(var)
    return c.y_of_z * c.xprime_of_z


def fuss_catalan(p: int, D: int = 3) -> int:
    """C_p[D] = binom(D p, p) / ((D-1) p + 1)."""
    if p < 0 or D < 2:
        raise ValueError("need p >= 0 and D >= 2")
    q, r = divmod(math.comb(D * p, p), (D - 1) * p + 1)
    assert r == 0
    return q


# ---------------------------------------------------------------------------
# numeric side
# ---------------------------------------------------------------------------


def x_num(z: complex) -> complex:
    return z ** 3 / (1 + z)


def y_num(z: complex) -> complex:
    return -(1 + z) / z ** 2


def deck_eval(branch: int, z: complex) -> complex:
    """The two non-trivial solutions d of x(d) = x(z).

    Principal square root of (z-3)(1+z); branch 1 carries the ``+`` sign, which
    makes d_1(z) ~ exp(-2 i pi / 3) z near z = 0.
    """
    if branch not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    z = complex(z)
    if z == -1:
        raise ZeroDivisionError("deck maps have a pole at z = -1")
    s = cmath.sqrt((z - 3) * (1 + z))
    sign = 1 if branch == 1 else -1
    return -0.5 * (z * z + z + sign * z * s) / (1 + z)


def w01_explicit_check(u: complex) -> complex:
    """G(u) = sum_p C_p[3] u^p via the closed radical form.

    Principal branches throughout; valid off the cut [4/27, oo).
    """
    u = complex(u)
    if u.imag == 0 and u.real >= 4 / 27:
        raise ValueError("u lies on the branch cut [4/27, oo)")
    if abs(u) < 0.02:
        # radical form cancels catastrophically here; the series converges like (27|u|/4)^p
        G, term, p = 0j, 1 + 0j, 0
        while abs(term) > 1e-18 or p < 2:
            term = fuss_catalan(p) * u ** p
            G += term
            p += 1
        return G
    v = -27 * u / 4
    root1, rootv = cmath.sqrt(1 + v), cmath.sqrt(v)
    kp = (root1 + rootv) ** (1 / 3)
    km = (root1 - rootv) ** (1 / 3)
    G = (kp - km) / cmath.sqrt(-3 * u)
    for _ in range(2):
        d = 3 * u * G ** 2 - 1
        if abs(d) < 1e-6:  # double root at the edge u = 4/27
            break
        G -= (u * G ** 3 - G + 1) / d
    return G


def _rho_scalar(x: float) -> float:
    if not 0 < x < 27 / 4:
        return 0.0
    s = math.sqrt(81 - 12 * x) + 9
    a = s ** (2 / 3) / (2 ** (2 / 3) * 3 ** (1 / 3) * x ** (4 / 3))
    b = 2 ** (2 / 3) * 3 ** (1 / 3) / (s * x) ** (2 / 3)
    v = a + b - 2 / x
    return math.sqrt(max(v, 0.0)) / (2 * math.pi)


def density_rho01(x):
    """Limiting eigenvalue density of S_2, supported on (0, 27/4].

    Accepts a scalar or an array.
    """
    if np.ndim(x) == 0:
        return _rho_scalar(float(x))
    return np.array([_rho_scalar(float(t)) for t in np.ravel(x)]).reshape(np.shape(x))


def density_from_cubic(x: float) -> float:
    """Independent density route: -Im W(x + i0)/pi with W a root of
    x^2 W^3 - x W + 1 = 0 (the root with negative imaginary part)."""
    if not 0 < x < 27 / 4:
        return 0.0
    roots = np.roots([x * x, 0.0, -x, 1.0])
    im = min(r.imag for r in roots)
    return max(-im, 0.0) / math.pi


def density_integral(f=None, lo: float = 0.0, hi: float = float(EDGE), power: int = 0) -> float:
    """Integral of x^power * rho over [lo, hi] using the substitution x = t^3,
    which removes the x^(-2/3) endpoint singularity at 0."""
    f = f or _rho_scalar
    lo, hi = max(lo, 0.0), min(hi, float(EDGE))
    if hi <= lo:
        return 0.0

    def g(t):
        x = t ** 3
        return f(x) * x ** power * 3 * t * t

    val, _ = integrate.quad(g, lo ** (1 / 3), hi ** (1 / 3), epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def bin_masses(edges: Iterable[float]) -> np.ndarray:
    edges = list(edges)
    return np.array([density_integral(lo=a, hi=b) for a, b in zip(edges[:-1], edges[1:])])


def density_grid(points: int = 200, lo: float = 0.0, hi: float = 7.0) -> list[tuple[float, float]]:
    xs = np.linspace(lo, hi, points)
    return [(float(t), _rho_scalar(float(t))) for t in xs]
