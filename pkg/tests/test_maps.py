import math

import pytest
from hypothesis import given, settings, strategies as st

from ginibre_loops.maps import (BudgetExceeded, MapSpec, cumulants_by_inversion, enumerate_cumulants, genus_of,
                                laurent_text, moment_polynomial)


def catalan(k):
    return math.comb(2 * k, k) // (k + 1)


def test_catalan_one_type():
    for k in range(1, 9):
        assert enumerate_cumulants(1, (k,)).connected[0] == catalan(k)


def test_two_types_k2():
    t = enumerate_cumulants(2, (2,))
    assert t.connected == {0: 3, 1: 1}
    assert t.candidates == 4


def test_two_point_planar():
    assert enumerate_cumulants(2, (1, 1)).connected.get(0) == 3


def test_genus_examples():
    spec = MapSpec(2, (2,))
    (comp,) = genus_of(spec, [0, 1, 2, 3])
    assert comp["genus"] == 0
    (comp,) = genus_of(spec, [2, 3, 0, 1])
    assert comp["genus"] == 1
    (comp,) = genus_of(MapSpec(1, (1,)), [0])
    assert comp["genus"] == 0


def test_genus_rejects_bad_permutations():
    spec = MapSpec(2, (2,))
    with pytest.raises(ValueError):
        genus_of(spec, [1, 0, 2, 3])
    with pytest.raises(ValueError):
        genus_of(spec, [0, 0, 2, 3])


def test_moment_polynomials():
    assert moment_polynomial(2, (1,)) == {1: 1}
    assert moment_polynomial(2, (2,)) == {1: 3, -1: 1}
    # one edge type: the square Wishart value E Tr W^2 = 2N, no N^-1 term
    assert moment_polynomial(1, (2,)) == {1: 2}
    assert moment_polynomial(2, (0, 1)) == {2: 1}


def test_inversion_matches_transitivity():
    for M, prof in [(2, (1, 1)), (2, (1, 2)), (1, (2, 2)), (2, (1, 1, 1))]:
        assert cumulants_by_inversion(M, prof) == enumerate_cumulants(M, prof).cumulant_polynomial()


def test_genus_bound_one_type():
    for k in range(1, 8):
        assert all(g < k / 2 for g in enumerate_cumulants(1, (k,)).connected)


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_cumulants(2, (6,), budget=1000)


def test_spec_validation():
    with pytest.raises(ValueError):
        MapSpec(3, (1,))
    with pytest.raises(ValueError):
        MapSpec(2, ())


def test_laurent_text():
    assert laurent_text({1: 3, -1: 1}) == "3*N + N^-1"
    assert laurent_text({}) == "0"


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=2).filter(lambda p: sum(p) <= 4), st.sampled_from([1, 2]))
def test_counts_non_negative_and_total(profile, M):
    t = enumerate_cumulants(M, profile)
    assert all(c >= 0 for c in t.connected.values())
    assert sum(t.moments.values()) == t.candidates
