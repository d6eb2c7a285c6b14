"""Printed closed forms and tables used as golden values."""
from __future__ import annotations

from .algebra import RationalFunc

#: coefficient of z1^(6-r) z2^(6-c) in the numerator of w_{1,2}
W12_NUMERATOR = (
    (128, 1280, 6144, 12288, 12480, 6912, 1728),
    (1280, 12800, 55680, 108672, 111168, 62208, 15552),
    (6144, 55680, 215352, 405000, 414234, 233280, 58320),
    (12288, 108672, 405000, 768312, 809838, 466560, 116640),
    (12480, 111168, 414234, 809838, 888165, 524880, 131220),
    (6912, 62208, 233280, 466560, 524880, 314928, 78732),
    (1728, 15552, 58320, 116640, 131220, 78732, 19683),
)

W21_NUMERATOR = (9, 153, 1284, 4227, 7626, 9246, 8280, 5220, 1971, 324)

#: upper triangle c^{[0]}_{i,j}, 1 <= i <= j <= 7
TWO_POINT_TABLE = {
    (1, 1): 3, (1, 2): 20, (1, 3): 126, (1, 4): 792, (1, 5): 5005, (1, 6): 31824, (1, 7): 203490,
    (2, 2): 150, (2, 3): 1008, (2, 4): 6600, (2, 5): 42900, (2, 6): 278460, (2, 7): 1808800,
    (3, 3): 7056, (3, 4): 47520, (3, 5): 315315, (3, 6): 2079168, (3, 7): 13674528,
    (4, 4): 326700, (4, 5): 2202200, (4, 6): 14702688, (4, 7): 97675200,
    (5, 5): 15030015, (5, 6): 101359440, (5, 7): 678978300,
    (6, 6): 689244192, (6, 7): 4649339520,
    (7, 7): 31549089600,
}

FUSS_CATALAN_3 = (1, 1, 3, 12, 55, 273, 1428, 7752, 43263, 246675, 1430715, 8414640, 50067108)


def _poly(z, coeffs):
    return sum((c * z ** k for k, c in enumerate(reversed(coeffs))), z * 0)


def w01():
    (z,) = RationalFunc.gens(("z1",))
    return -(2 * z + 3) / (z + 1)


def w11():
    (z,) = RationalFunc.gens(("z1",))
    return (z ** 4 + 7 * z ** 3 + 21 * z ** 2 + 24 * z + 9) / (z ** 2 * (2 * z + 3) ** 4)


def w21():
    (z,) = RationalFunc.gens(("z1",))
    return _poly(z, W21_NUMERATOR) / (z ** 3 * (2 * z + 3) ** 10)


def tilde_w02():
    z1, z2 = RationalFunc.gens(("z1", "z2"))
    num = z2 ** 2 * z1 ** 2 + 2 * (z2 * z1 ** 2 + z2 ** 2 * z1) + z1 ** 2 + z2 ** 2 + 4 * z2 * z1
    den = (z2 * z1 ** 2 + z2 ** 2 * z1 + z1 ** 2 + z2 ** 2 + z2 * z1) ** 2
    return num / den


def w12():
    z1, z2 = RationalFunc.gens(("z1", "z2"))
    pol = z1 * 0
    for r, row in enumerate(W12_NUMERATOR):
        for c, coef in enumerate(row):
            pol = pol + coef * z1 ** (6 - r) * z2 ** (6 - c)
    return pol / (z1 ** 2 * (2 * z1 + 3) ** 6 * z2 ** 2 * (2 * z2 + 3) ** 6)


def w03():
    z1, z2, z3 = RationalFunc.gens(("z1", "z2", "z3"))
    return RationalFunc.constant(("z1", "z2", "z3"), 24) / (
        (2 * z1 + 3) ** 2 * (2 * z2 + 3) ** 2 * (2 * z3 + 3) ** 2)


#: (g, n, tilde) -> printed w-form
CLOSED_FORMS = {
    (0, 1, False): w01,
    (0, 2, True): tilde_w02,
    (1, 1, False): w11,
    (2, 1, False): w21,
    (0, 3, False): w03,
    (1, 2, False): w12,
}

