import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ecstats.errors import BadInputError, ResourceLimitError
from ecstats.levels import gamma1
from ecstats.parametrizations import builtin_parametrization
from ecstats.wps_rational import (WpsMorphism, content_ideal, defect, enumerate_points, normalize,
                                  reduce_mod_p, scale)

coords = st.integers(-10**6, 10**6)


def test_content_examples():
    assert content_ideal((4, 6), (16, 64)) == 2
    assert content_ideal((1, 1), (9, 14)) == 1
    assert content_ideal((4, 6), (2, 2)) == 1
    assert content_ideal((4, 6), (0, 729)) == 3
    with pytest.raises(BadInputError):
        content_ideal((4, 6), (0, 0))


def test_normalize_examples():
    p = normalize((4, 6), (16, 64))
    assert p.coords == (1, 1) and p.height == 1
    q = normalize((4, 6), (-3, 2))
    assert q.coords == (-3, 2) and q.height == pytest.approx(3 ** 0.25)
    assert normalize((1, 1), (6, 10)).coords == (3, 5)
    assert normalize((1, 1), (-6, 10)).coords == (3, -5)
    assert normalize((1, 2), (-1, 5)).coords == (1, 5)
    assert normalize((1, 3), (0, -8)).coords == (0, 1)


def test_reduction_examples():
    assert reduce_mod_p(normalize((4, 6), (-3, 2)), 5).value == (2, 2)
    assert reduce_mod_p(normalize((4, 6), (5, 5)), 5).is_star
    assert reduce_mod_p(normalize((1, 1), (3, 8)), 7).value == (1, 5)


@settings(max_examples=200, deadline=None)
@given(coords, coords, st.integers(-30, 30).filter(bool))
def test_normalize_properties(a, b, lam):
    if a == 0 and b == 0:
        return
    w = (4, 6)
    p = normalize(w, (a, b))
    assert normalize(w, p.coords) == p
    assert content_ideal(w, p.coords) == 1
    s = normalize(w, scale(w, lam, (a, b)))
    assert s.height_power == p.height_power
    assert s == p  # lam and -lam act identically on even weights


@settings(max_examples=200, deadline=None)
@given(coords, coords, st.integers(1, 50), st.sampled_from([5, 7, 11, 13]))
def test_reduction_is_well_defined(a, b, lam, q):
    if a == 0 and b == 0 or lam % q == 0:
        return
    for w in ((4, 6), (1, 1), (1, 3)):
        x = normalize(w, (a, b))
        y = normalize(w, scale(w, lam, (a, b)))
        assert reduce_mod_p(x, q) == reduce_mod_p(y, q)


def test_exact_height_threshold():
    p = normalize((4, 6), (16, 1))
    assert p.height_at_most(2) and not p.height_at_most(Fraction(19999, 10000))


@pytest.mark.parametrize("w,B", [((1, 1), 2), ((1, 1), 7), ((4, 6), 1), ((4, 6), Fraction(3, 2)),
                                 ((1, 2), 3), ((2, 3), 2)])
def test_enumeration_matches_double_loop(w, B):
    B = Fraction(B)
    got = [p.coords for p in enumerate_points(w, B)]
    assert len(got) == len(set(got))
    want = set()
    R = [math.floor(float(B) ** wj) + 1 for wj in w]
    for a in range(-R[0], R[0] + 1):
        for b in range(-R[1], R[1] + 1):
            if (a, b) == (0, 0):
                continue
            pt = normalize(w, (a, b))
            if pt.height_at_most(B):
                want.add(pt.coords)
    assert set(got) == want


def test_enumeration_edges():
    assert list(enumerate_points((4, 6), Fraction(1, 2))) == []
    with pytest.raises(ResourceLimitError):
        list(enumerate_points((4, 6), 10**3))


def test_identity_morphism_has_no_defect():
    ident = WpsMorphism((1, 1), (1, 1), ((((1, 0), 1),), (((0, 1), 1),)), 1)
    for x in ((1, 0), (3, 5), (-2, 7)):
        assert defect(ident, x) == 1


def test_defect_scaling_invariance():
    f = builtin_parametrization(gamma1(5)).morphism
    for x, lam in (((3, 5), 7), ((2, -9), 4), ((11, 1), -3)):
        assert defect(f, x) == defect(f, scale((1, 1), lam, x))


def test_gamma1_5_defects_are_bounded():
    f = builtin_parametrization(gamma1(5)).morphism
    seen = set()
    for p in enumerate_points((1, 1), 50):
        if any(f(p.coords)):
            seen.add(defect(f, p))
    assert seen and all(d.denominator == 1 for d in seen)
    assert len(seen) <= 4


def test_scaled_coefficients_scale_defects():
    f = builtin_parametrization(gamma1(5)).morphism
    m = 2
    g = WpsMorphism(f.source, f.target,
                    tuple(tuple((mono, c * m**wj) for mono, c in poly) for poly, wj in zip(f.polys, f.target)),
                    f.e)
    for x in ((1, 2), (3, 7), (5, -4)):
        assert defect(g, x) == m * defect(f, x)


def test_base_locus_and_bad_monomials():
    zero = WpsMorphism((1, 1), (1, 1), ((((1, 0), 1),), (((1, 0), 1),)), 1)
    with pytest.raises(BadInputError):
        defect(zero, (0, 1))
    with pytest.raises(BadInputError):
        WpsMorphism((1, 1), (4, 6), ((((2, 0), 1),), (((6, 0), 1),)), 1)
