from fractions import Fraction

import mpmath
import pytest

from ginibre_loops import golden
from ginibre_loops.algebra import RationalFunc, rf_substitute
from ginibre_loops.curve import x_num, y_num
from ginibre_loops.loops import (GENUS_OFFSET, LoopSolverError, ResolventTable, Ring, SymbolicBackend, base_w02,
                                 complexity, diff_quotient, is_symmetric, op_Ox, partition_terms, pole_violations,
                                 prerequisites, schedule, set_partitions, solve_w02_from_loop, solve_wgn, tilde_w_term, to_w_form)

mpmath.mp.dps = 40


def cubic_root_near(x, guess):
    """Root of x^2 W^3 - x W + 1 = 0 nearest to ``guess``, at high precision."""
    return mpmath.findroot(lambda w: x ** 2 * w ** 3 - x * w + 1, mpmath.mpf(guess))


# -- base cases ---------------------------------------------------------------


def test_base_w02_tilde_form():
    r = Ring(2)
    assert (base_w02() * r.xp[0] * r.xp[1]).equals(golden.tilde_w02())


def test_base_w02_shifted_is_universal():
    z1, z2 = RationalFunc.gens(("z1", "z2"))
    table = ResolventTable()
    assert to_w_form(table, 0, 2).equals(1 / (z1 - z2) ** 2)


def test_base_w02_diagonal_finite():
    (z,) = RationalFunc.gens(("z",))
    diag = rf_substitute(base_w02(), {"z1": z, "z2": z})
    for v in (Fraction(1), Fraction(2), Fraction(-1, 3), Fraction(5, 7)):
        assert diag(v) is not None


def test_w02_from_loop_equals_base():
    w = solve_w02_from_loop()
    assert w.equals(golden.tilde_w02())
    assert is_symmetric(w)
    # complexity zero: the printed denominator carries the deck factor, nothing else
    factors = lambda f: sorted((fac.to_text(), e) for fac, e in f.factor_den())
    assert factors(w) == factors(golden.tilde_w02())


def test_to_w_form_base():
    table = ResolventTable()
    assert to_w_form(table, 0, 1).equals(golden.w01().remap([0], ("z1",)))


# -- operators ----------------------------------------------------------------


def test_Ox_constant_and_chain_rule():
    table = ResolventTable()
    b = SymbolicBackend(table, 2)
    assert op_Ox(b.const(7), 0, b).is_zero()
    assert b.D(b.x(1), 1).equals(b.const(1))


def test_Ox_against_x_space_cubic():
    table = ResolventTable()
    b = SymbolicBackend(table, 1)
    W = table.at(0, [0], 1)
    x = b.x(0)
    exact = (x ** 2 * op_Ox(W, 0, b))(Fraction(1))
    # z = 1 sits at x = 1/2 on the sheet where W = y(1) = -2
    X = mpmath.mpf(1) / 2
    f = lambda t: cubic_root_near(t, y_num(1))
    numeric = X * mpmath.diff(f, X) + X ** 2 / 2 * mpmath.diff(f, X, 2)
    assert abs(float(exact) - float(numeric)) < 1e-10


def test_diff_quotient_factorization():
    r = Ring(2)
    z1, z2 = RationalFunc.gens(r.vars)
    want = (z1 - z2) * (z1 ** 2 + z1 * z2 + z2 ** 2 + z1 * z2 * (z1 + z2)) / ((1 + z1) * (1 + z2))
    assert (r.x[0] - r.x[1]).equals(want)


def test_diff_quotient_removable():
    r = Ring(2)
    num = r.y[0] ** 2 - r.y[0] * r.y[1]
    q = diff_quotient(num, 0, 1, r)
    (z,) = RationalFunc.gens(("z",))
    diag = rf_substitute(q, {"z1": z, "z2": z})
    assert diag(Fraction(2)) is not None


def test_diff_quotient_rejects_non_vanishing_numerator():
    r = Ring(2)
    with pytest.raises(LoopSolverError):
        diff_quotient(r.y[0] + 5, 0, 1, r)


def test_vandermonde_triple_against_x_space():
    r = Ring(3)
    x1, x2, x3 = r.x
    y1, y2, y3 = r.y
    delta = (x3 - x2) * (x3 - x1) * (x2 - x1)
    expr = x1 * x2 * x3 * ((x2 - x3) * y1 - (x1 - x3) * y2 + (x1 - x2) * y3) / delta
    exact = float(expr(1, 2, 4))
    zs = (1, 2, 4)
    X = [mpmath.mpf(x_num(z)) for z in zs]
    Y = [cubic_root_near(xv, y_num(z)) for xv, z in zip(X, zs)]
    d = (X[2] - X[1]) * (X[2] - X[0]) * (X[1] - X[0])
    numeric = X[0] * X[1] * X[2] * ((X[1] - X[2]) * Y[0] - (X[0] - X[2]) * Y[1] + (X[0] - X[1]) * Y[2]) / d
    assert abs(exact - float(numeric)) < 1e-10


# -- partition sum ------------------------------------------------------------


def test_partition_multiplicity():
    shapes = [tuple(sorted(len(b) for b in mu)) for mu in set_partitions([0, 1, 2])]
    assert shapes.count((1, 2)) == 3
    assert shapes.count((1, 1, 1)) == 1 and shapes.count((3,)) == 1
    # at (1,1) the pair shape {x1,x1},{x1} carries genus 0 on both blocks
    pairs = [t for t in partition_terms(1, 1) if len(t.parts) == 2]
    assert len(pairs) == 3 and all(t.genera == (0, 0) for t in pairs)


def test_partition_genus_lowest_order():
    for t in partition_terms(0, 3):
        assert len(t.parts) == 3 and all(gb == 0 for gb in t.genera)


def test_partition_order_g_one_point_has_w03():
    terms = list(partition_terms(2, 1))
    assert any(t.genera == (0,) and len(t.parts[0]) == 3 for t in terms)


def test_tilde_w_term_11():
    table = ResolventTable()
    b = SymbolicBackend(table, 1)
    known, coeff = tilde_w_term(b, 1, 1)
    W01 = table.at(0, [0], 1)
    W02diag = table.at(0, [0, 0], 1)
    assert known.equals(3 * W01 * W02diag)
    assert coeff.equals(3 * W01 ** 2)


def test_unknown_coefficient_is_minus_sigma(table):
    r = Ring(1)
    b = SymbolicBackend(table, 1)
    _, coeff = tilde_w_term(b, 1, 1)
    assert (coeff - 1 / r.x[0]).equals(-r.sigma)


def test_missing_prerequisite():
    with pytest.raises(LoopSolverError):
        solve_wgn(ResolventTable(), 1, 2)


def test_base_case_rejected():
    with pytest.raises(ValueError):
        solve_wgn(ResolventTable(), 0, 2)


# -- goldens and properties -----------------------------------------------------


@pytest.mark.parametrize("gn", [(1, 1), (2, 1), (0, 3), (1, 2)])
def test_golden(table, gn):
    g, n = gn
    want = golden.CLOSED_FORMS[(g, n, False)]()
    assert to_w_form(table, g, n).equals(want)


def test_symmetry_and_poles(table):
    for g, n in table.keys():
        if complexity(g, n) <= 0:
            continue
        assert is_symmetric(table[(g, n)])
        assert pole_violations(to_w_form(table, g, n)) == []


def test_mutated_offset_breaks_w11():
    table = ResolventTable(genus_offset=GENUS_OFFSET + 1)
    try:
        solve_wgn(table, 1, 1, check=False)
    except LoopSolverError:
        return
    assert not to_w_form(table, 1, 1).equals(golden.CLOSED_FORMS[(1, 1, False)]())


def test_schedule_and_prerequisites():
    assert schedule(2) == [(1, 1), (0, 3), (1, 2), (0, 4)]
    assert (3, 1) not in schedule(3)
    assert set(schedule(4)) >= {(0, 6), (1, 4), (2, 2)}
    assert prerequisites([(1, 2)]) == [(1, 1), (0, 3), (1, 2)]
