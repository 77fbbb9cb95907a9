from fractions import Fraction

import pytest

from conftest import brute_family
from ecstats.errors import BadInputError
from ecstats.ff_curves import get_census
from ecstats.family_count import (FamilyCounter, candidate_bad_primes, defect_primes, local_densities,
                                  p46_classes)
from ecstats.level_fibers import fiber_size
from ecstats.levels import gamma1
from ecstats.parametrizations import builtin_parametrization
from ecstats.torsion_families import GlobalCurve, local_type, stream_statistics

# (level, height bound, box for x1, rows, parameter points found by the box scan; stable when the box doubles)
BRUTE = [
    (3, 4, 800, 40, 185),
    (4, 8, 800, 80, 554),
    (5, 100, 300, 200, 1404),
    (6, 30, 250, 250, 610),
    (7, 300, 150, 80, 225),
    (8, 200, 150, 80, 118),
    (9, 500, 80, 40, 54),
    (10, 500, 80, 40, 50),
    (12, 1000, 60, 40, 32),
]


def fam(N):
    return builtin_parametrization(gamma1(N))


@pytest.mark.parametrize("N,X,box,rows,expected", BRUTE)
def test_counter_matches_box_scan(N, X, box, rows, expected):
    assert FamilyCounter(fam(N)).count(X).total == expected


def _observer_primes(N):
    bad = set(candidate_bad_primes(fam(N)))
    return [q for q in (5, 7, 11, 13, 17, 19) if q not in bad and (6 * N) % q][:2]


@pytest.mark.parametrize("N,X,box,rows,expected", BRUTE)
def test_reduction_tallies_match_box_scan(N, X, box, rows, expected):
    points = brute_family(fam(N), X, box, rows)
    assert len(points) == expected
    qs = _observer_primes(N)
    stats = stream_statistics(gamma1(N), X, qs)
    for q in qs:
        want = {}
        for t, (A, B) in points:
            rep = local_type(GlobalCurve(A, B, t), q)
            key = rep.kind if rep.kind != "good" else ("good", rep.a)
            want[key] = want.get(key, 0) + 1
        s = stats[q]
        got = {("good", a): n for a, n in s.by_trace().items() if n}
        for kind in ("split", "nonsplit", "additive"):
            if getattr(s, kind):
                got[kind] = getattr(s, kind)
        assert got == want, q


@pytest.mark.parametrize("N", [5, 6, 7, 8, 9, 10, 12])
def test_local_densities_are_fibers_over_q_plus_one(N):
    for q in _observer_primes(N):
        dens = local_densities(fam(N), q)
        census = get_census(q)
        cls = p46_classes(q)
        for i, rec in enumerate(census.classes):
            assert dens.get(i, 0) == fiber_size(gamma1(N), rec) / (q + 1)
        assert sum(dens.values()) == 1
        assert dens.get(cls.star, 0) == 0


def test_class_ids_of_p46_points():
    q = 11
    cls = p46_classes(q)
    census = get_census(q)
    for i, rec in enumerate(census.classes):
        assert cls.lookup(rec.A, rec.B) == i
        assert cls.lookup(rec.A * 5**4 % q, rec.B * 5**6 % q) == i
    assert cls.lookup(0, 0) == cls.star
    # alpha = 1 is a square, alpha = 2 is not (mod 11)
    assert cls.lookup(-3 % q, 2) == cls.node_square
    assert cls.lookup(-12 % q, 16 % q) == cls.node_nonsquare


def test_bad_primes_are_rejected_as_observers():
    f = fam(7)
    assert 7 in candidate_bad_primes(f) and 3 in defect_primes(f)
    with pytest.raises(BadInputError):
        FamilyCounter(f).count(100, qs=(7,))


def test_zero_bound_and_completeness():
    c = FamilyCounter(fam(5))
    assert c.count(0).total == 0
    res = c.count(Fraction(2000))
    assert res.completeness_ok
    assert res.total == c.count(2000).total


def test_counts_grow_like_the_expected_power():
    # X^(2/e): Gamma1(5) has e = 1, so doubling X multiplies the count by about 4
    c = FamilyCounter(fam(5))
    a, b = c.count(2000).total, c.count(4000).total
    assert 3.8 < b / a < 4.2
