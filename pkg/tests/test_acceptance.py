"""Acceptance criteria 1-10, one test each, tolerances as stated."""
import time
from fractions import Fraction

import numpy as np
import pytest

from ginibre_loops import golden
from ginibre_loops.algebra import RationalFunc
from ginibre_loops.curve import (deck_eval, density_integral, fuss_catalan, w01_explicit_check, x_num, y_num)
from ginibre_loops.loops import (base_w02, complexity, property_report, solve_all, solve_through,
                                 solve_w02_from_loop, to_w_form, zvars)
from ginibre_loops.maps import enumerate_cumulants
from ginibre_loops.moments import (MomentEngine, check_conjectures, check_planar_recurrence, recurrence_domain)
from ginibre_loops.montecarlo import eigen_density, estimate, exact_cumulant, exact_moment, sample_traces

MC_N = 100
MC_SAMPLES = 10_000
DENSITY_N = 200
DENSITY_SAMPLES = 1000
GATE = 5.0


def test_criterion_01_golden_exactness():
    t0 = time.perf_counter()
    table = solve_through([(2, 1), (1, 2), (0, 3)])
    for (g, n, tilde), form in golden.CLOSED_FORMS.items():
        got = to_w_form(table, g, n, tilde=tilde)
        assert got.equals(form()), (g, n, tilde)
    assert len(golden.W12_NUMERATOR) * len(golden.W12_NUMERATOR[0]) == 49
    elapsed = time.perf_counter() - t0
    assert elapsed <= 60, f"{elapsed:.1f}s"


def test_criterion_02_universality():
    table = solve_through([(1, 1)])
    z1, z2 = RationalFunc.gens(zvars(2))
    assert to_w_form(table, 0, 2).equals(1 / (z1 - z2) ** 2)
    r = table.ring(2)
    assert solve_w02_from_loop().equals(base_w02() * r.xp[0] * r.xp[1])


def test_criterion_03_fuss_catalan(engine):
    got = [engine.cumulant(0, (k,)) for k in range(13)]
    assert got[:7] == [1, 1, 3, 12, 55, 273, 1428]
    assert got == [fuss_catalan(k, 3) for k in range(13)]


def test_criterion_04_table_reproduction(engine):
    assert len(golden.TWO_POINT_TABLE) == 28
    for (i, j), v in golden.TWO_POINT_TABLE.items():
        assert engine.cumulant(0, (i, j)) == v, (i, j)
    assert engine.cumulant(0, (4, 4)) == 326700
    assert engine.cumulant(0, (7, 7)) == 31549089600


def test_criterion_05_recurrence(engine):
    dom = recurrence_domain(10)
    assert len(dom) == 36
    failing = [kq for kq in dom if not check_planar_recurrence(*kq, engine)]
    assert failing == []


def test_criterion_06_oracle_triangle(engine):
    t0 = time.perf_counter()
    for k in range(1, 7):
        assert enumerate_cumulants(2, (k,)).connected.get(0, 0) == engine.cumulant(0, (k,)), k
    for k in range(1, 6):
        assert enumerate_cumulants(2, (k,)).connected.get(1, 0) == engine.cumulant(1, (k,)), k
    for i in range(1, 6):
        for j in range(i, 7 - i):
            assert enumerate_cumulants(2, (i, j)).connected.get(0, 0) == engine.cumulant(0, (i, j)), (i, j)
    catalan = [1, 2, 5, 14, 42, 132, 429, 1430]
    assert [enumerate_cumulants(1, (k,)).connected[0] for k in range(1, 9)] == catalan
    elapsed = time.perf_counter() - t0
    assert elapsed <= 600, f"{elapsed:.1f}s"


def test_criterion_07_conjecture_reports(engine):
    rep = check_conjectures(engine, 7)
    disagree = [r for r in rep.two_point + rep.genus_one if not r["agree"]]
    assert disagree == []
    assert rep.to_json()["status"] == "conjectures consistent with extracted values"


def test_criterion_08_pole_locations():
    table = solve_all(4)
    expected = {(g, n) for g in range(4) for n in range(1, 7) if 0 < complexity(g, n) <= 4}
    assert expected <= set(table.keys())
    reports = property_report(table)
    for p in reports:
        print(f"w_{p.g},{p.n}: {p.method} {p.seconds:.1f}s confined={p.confined} "
              f"positive_numerator={p.positive_numerator}")
    bad = [(p.g, p.n, p.violations) for p in reports if not p.confined]
    assert bad == []
    assert {(p.g, p.n) for p in reports} == expected


def test_criterion_09_density():
    assert abs(density_integral() - 1) <= 1e-8
    assert abs(density_integral(power=1) - 1) <= 1e-6
    rng = np.random.default_rng(2024)
    us = [complex(rng.uniform(-1, 0.14), rng.uniform(-0.5, 0.5)) for _ in range(20)]
    for u in us:
        G = w01_explicit_check(u)
        assert abs(u * G ** 3 - G + 1) <= 1e-10, u
    for _ in range(200):
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        x = x_num(z)
        scale = max(1.0, abs(x))
        for b in (1, 2):
            d = deck_eval(b, z)
            assert abs(x_num(d) - x) <= 1e-10 * scale
            assert abs(y_num(d) / y_num(z) - d / z) <= 1e-10 * max(1.0, abs(d / z))


def test_criterion_10_monte_carlo_ladder():
    t0 = time.perf_counter()
    tr = sample_traces(MC_N, 2, MC_SAMPLES, seed=0)
    N = MC_N
    checks = {
        "m1/N": (estimate(tr, (1,), N, 1 / N), [1.0, exact_moment(1, N) / N]),
        "m2/N": (estimate(tr, (2,), N, 1 / N), [3 + Fraction(1, N ** 2), exact_moment(2, N) / N]),
        "Var Tr S2": (estimate(tr, (1, 1), N), [3.0, exact_cumulant((1, 1), N)]),
        "c_1,2": (estimate(tr, (1, 2), N), [20.0, exact_cumulant((1, 2), N)]),
    }
    for name, (est, targets) in checks.items():
        for target in targets:
            z = est.zscore(float(target))
            print(f"{name}: {est.mean:.5f} +- {est.stderr:.5f} vs {float(target):.6f}, z = {z:+.2f}")
            assert abs(z) <= GATE, (name, float(target), z)
    rep = eigen_density(DENSITY_N, DENSITY_SAMPLES, bins=60, seed=0)
    print(f"density: sup relative deviation {rep.sup_rel_dev:.4f} over {rep.dof} bins, "
          f"fraction above edge+0.3 {rep.frac_above_edge:.5f}, min eigenvalue {rep.min_eigenvalue:.2e}")
    assert rep.sup_rel_dev <= 0.05
    assert rep.frac_above_edge <= 0.002
    assert rep.min_eigenvalue >= -1e-10
    elapsed = time.perf_counter() - t0
    print(f"criterion 10 runtime {elapsed:.0f}s")
    assert elapsed <= 900, f"{elapsed:.0f}s"
