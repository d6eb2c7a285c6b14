from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ginibre_loops.montecarlo import (EigenError, FitError, GinibreSample, McEstimate, _eigs_one, eigen_density,
                                      estimate, estimate_cumulants, exact_cumulant, exact_moment,
                                      fit_genus_expansion, hermitian_eigen, ladder, sample_traces)


# -- Jacobi -------------------------------------------------------------------


def test_jacobi_examples():
    assert np.allclose(hermitian_eigen(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    assert np.allclose(hermitian_eigen(np.array([[0, 1], [1, 0]])), [-1, 1])
    assert np.allclose(hermitian_eigen(np.zeros((3, 3))), [0, 0, 0])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 31))
def test_jacobi_trace_identities(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = A + A.conj().T
    lam = hermitian_eigen(H)
    assert np.all(np.diff(lam) >= 0)
    assert abs(lam.sum() - np.trace(H).real) < 1e-10 * max(1, np.abs(H).sum())
    assert abs((lam ** 2).sum() - np.trace(H @ H).real) < 1e-10 * max(1, (np.abs(H) ** 2).sum())
    assert np.allclose(lam, np.linalg.eigvalsh(H), atol=1e-10 * np.linalg.norm(H))


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigen(np.array([[0, 1], [0, 0]], dtype=complex))


def test_jacobi_sweep_limit():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(30, 30))
    with pytest.raises(EigenError):
        hermitian_eigen(A + A.T, max_sweeps=1)


def test_density_spectrum_matches_lapack():
    lam = _eigs_one(40, 5, 0)
    s = GinibreSample.draw(40, 5, 0)
    ref = np.sort(np.linalg.eigvals(s.S2()).real)
    assert np.allclose(lam, ref, atol=1e-9)
    assert lam.min() >= -1e-10


# -- sampling -----------------------------------------------------------------


def test_variance_convention():
    s = GinibreSample.draw(200, 0, 0)
    assert abs(s.variance_zscore()) < 5
    assert abs(np.mean(np.abs(s.X1) ** 2) * 200 - 1) < 0.02


def test_traces_by_multiplication():
    t = sample_traces(6, 4, 100, seed=2)
    S = GinibreSample.draw(6, 2, 0).S2()
    lam = np.linalg.eigvals(S)
    assert np.allclose(t[0], [(lam ** k).sum().real for k in range(1, 5)])


def test_determinism_across_workers():
    a = sample_traces(8, 3, 120, seed=11, workers=1)
    b = sample_traces(8, 3, 120, seed=11, workers=3)
    assert np.array_equal(a, b)
    c = sample_traces(8, 3, 120, seed=12)
    assert not np.array_equal(a, c)


def test_sample_traces_preconditions():
    with pytest.raises(ValueError):
        sample_traces(1, 2, 100)
    with pytest.raises(ValueError):
        sample_traces(4, 9, 100)
    with pytest.raises(ValueError):
        sample_traces(4, 2, 50)


# -- estimators -----------------------------------------------------------------


def brute_jackknife(data, fn):
    n = len(data)
    loo = np.array([fn(np.delete(data, i, axis=0)) for i in range(n)])
    return np.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())


def k2_joint(d):
    return np.cov(d[:, 0], d[:, 1], ddof=1)[0, 1]


def k3_joint(d):
    n = len(d)
    a, b, c = (d[:, i] - d[:, i].mean() for i in range(3))
    return n * (a * b * c).sum() / ((n - 1) * (n - 2))


def test_kstats_against_scipy_and_brute_force():
    rng = np.random.default_rng(4)
    x = rng.gamma(2.0, size=(60, 3))
    e1 = estimate(x, (1,))
    assert np.isclose(e1.mean, x[:, 0].mean())
    assert np.isclose(e1.stderr, x[:, 0].std(ddof=1) / np.sqrt(60))
    e2 = estimate(x, (1, 1))
    assert np.isclose(e2.mean, stats.kstat(x[:, 0], 2))
    assert np.isclose(e2.stderr, brute_jackknife(x[:, [0, 0]], k2_joint))
    e3 = estimate(x, (1, 1, 1))
    assert np.isclose(e3.mean, stats.kstat(x[:, 0], 3))
    e = estimate(x, (1, 2, 3))
    assert np.isclose(e.mean, k3_joint(x))
    assert np.isclose(e.stderr, brute_jackknife(x, k3_joint))
    e = estimate(x, (2, 3))
    assert np.isclose(e.stderr, brute_jackknife(x[:, 1:], k2_joint))


def test_estimate_cumulants_keys():
    x = np.random.default_rng(0).normal(size=(10, 2))
    keys = set(estimate_cumulants(x, max_order=2))
    assert keys == {"c_1", "c_2", "c_1,1", "c_1,2", "c_2,2"}


def test_estimate_needs_two_samples():
    with pytest.raises(ValueError):
        estimate(np.ones((1, 1)), (1,))


def test_exact_predictions():
    assert exact_moment(1, 7) == 7
    assert exact_moment(2, 10) == 30 + Fraction(1, 10)
    assert exact_cumulant((1, 1), 100) == 3
    assert exact_cumulant((1, 2), 100) == 20 + Fraction(12, 10 ** 4)
    assert exact_cumulant((1, 1, 1), 10) == Fraction(24, 10) + Fraction(2, 10 ** 3)


def test_fit_recovers_line():
    pts = [McEstimate("m", 3 + 1 / N ** 2, 1e-3, 100, N) for N in (4, 6, 8)]
    fit = fit_genus_expansion(pts)
    assert abs(fit.a - 3) < 1e-9 and abs(fit.b - 1) < 1e-6 and fit.chi2 < 1e-12
    assert fit.joint_chi2(3, 1) < 1e-9


def test_fit_errors():
    with pytest.raises(FitError):
        fit_genus_expansion([McEstimate("m", 1, 1, 100, N) for N in (4, 8)])
    with pytest.raises(FitError):
        fit_genus_expansion([McEstimate("m", 1, 1, 100, N) for N in (1000, 1001, 1002)])


def test_ladder_small_N():
    rows = ladder(12, 400, seed=3)
    assert [r.stat for r in rows] == ["m1/N", "m2/N", "c_1,1", "c_1,2", "N*c_1,1,1"]
    for r in rows:
        assert r.ok, r.to_json()
        assert r.estimate.stderr > 0


def test_density_small():
    rep = eigen_density(20, 10, bins=30, seed=1)
    assert sum(rep.counts) + rep.overflow == 200
    assert rep.min_eigenvalue >= -1e-10
    assert abs(sum(rep.expected_mass) - 1) < 1e-8
    assert len(rep.csv_rows()) == 32
    with pytest.raises(ValueError):
        eigen_density(401, 1)
