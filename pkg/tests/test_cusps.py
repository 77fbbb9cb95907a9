import math
from fractions import Fraction

import pytest

from conftest import primes_between
from ecstats.cusp_census import (SL2ModN, build_subgroup, cusp_orbits, index_and_e, plus_minus,
                                 rational_cusp_count, sl2_order, surjections)
from ecstats.errors import CoprimalityError, ResourceLimitError
from ecstats.levels import LevelSpec, full_gamma, gamma1, parse_level


def closed_form(N: int, q: int) -> int:
    """Rational cusps of X_1(N) over F_q for the levels with a known table."""
    pm1 = q % N in (1, N - 1)
    if N == 4:
        return 3
    if N == 8:
        return 6 if pm1 else 4
    if N == 12:
        return 10 if q % 12 == 1 else 6
    if N == 9:
        return {1: 8, 8: 6, 4: 5, 7: 5, 2: 3, 5: 3}[q % 9]
    if N % 2 == 0:
        phi = N // 2 - 1  # phi(2l) = l - 1
        return 2 * phi if pm1 else phi
    return N - 1 if pm1 else (N - 1) // 2


@pytest.mark.parametrize("N", [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14])
def test_rational_cusps_closed_forms(N):
    for q in range(2, 201):
        if math.gcd(q, N) == 1:
            assert rational_cusp_count(gamma1(N), q) == closed_form(N, q), (N, q)


def test_documented_values():
    assert rational_cusp_count(gamma1(5), 11) == 4
    assert rational_cusp_count(gamma1(5), 7) == 2
    assert rational_cusp_count(gamma1(9), 2) == 3
    assert rational_cusp_count(gamma1(9), 19) == 8
    assert rational_cusp_count(gamma1(4), 101) == 3


@pytest.mark.parametrize("N", [5, 6, 7, 8, 9, 10, 12])
def test_orbit_count_matches_divisor_sum(N):
    expected = sum(_phi(d) * _phi(N // d) for d in range(1, N + 1) if N % d == 0) // 2
    assert len(cusp_orbits(gamma1(N))) == expected


def _phi(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


@pytest.mark.parametrize("spec", [gamma1(5), gamma1(12), full_gamma(5), LevelSpec(2, 3), gamma1(9)])
def test_orbits_partition_surjections(spec):
    orbits = cusp_orbits(spec)
    flat = [v for o in orbits for v in o.representatives]
    assert len(flat) == len(set(flat))
    assert set(flat) == set(surjections(spec.level))
    # closed under the full action of +-Gamma-bar, not just the generators
    n = spec.level
    group = plus_minus(build_subgroup(spec))
    for o in orbits:
        members = set(o.representatives)
        a1, a2 = o.rep
        assert {((a1 * a + a2 * c) % n, (a1 * b + a2 * d) % n) for a, b, c, d in group} == members


@pytest.mark.parametrize("n", [2, 5, 6, 12])
def test_sl2_order(n):
    assert len(SL2ModN.build(n).elements) == sl2_order(n)
    brute = sum(1 for a in range(n) for b in range(n) for c in range(n) for d in range(n)
                if (a * d - b * c) % n == 1 % n)
    assert sl2_order(n) == brute


def test_subgroup_sizes():
    assert len(build_subgroup(gamma1(5))) == 5
    assert len(build_subgroup(full_gamma(5))) == 1
    spec = LevelSpec(2, 3)  # Gamma(2) cap Gamma1(6)
    brute = sum(1 for a in range(6) for b in range(6) for c in range(6) for d in range(6)
                if (a * d - b * c) % 6 == 1 and a % 6 == 1 and c % 6 == 0 and d % 6 == 1 and b % 2 == 0)
    assert len(build_subgroup(spec)) == brute
    assert build_subgroup(gamma1(7)).is_closed()


@pytest.mark.parametrize("spec,index,e", [
    (gamma1(5), 24, 1), (gamma1(7), 48, 2), (gamma1(9), 72, 3), (gamma1(12), 96, 4),
    (full_gamma(5), 120, 5), (gamma1(8), 48, 2), (gamma1(10), 72, 3), (gamma1(6), 24, 1)])
def test_index_and_e(spec, index, e):
    assert index_and_e(spec) == (index, Fraction(e))


@pytest.mark.parametrize("N", [3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13])
def test_index_formula(N):
    primes = [p for p in range(2, N + 1) if N % p == 0 and all(p % d for d in range(2, p))]
    expected = Fraction(N * N)
    for p in primes:
        expected *= 1 - Fraction(1, p * p)
    assert index_and_e(gamma1(N))[0] == expected


@pytest.mark.parametrize("N", [5, 7, 9, 12])
def test_cusp_bounds(N):
    spec = gamma1(N)
    index = index_and_e(spec)[0]
    for q in primes_between(2, 60):
        if N % q:
            assert rational_cusp_count(spec, q) <= len(cusp_orbits(spec)) <= 2 * index


def test_coprimality_and_ceiling():
    with pytest.raises(CoprimalityError):
        rational_cusp_count(gamma1(10), 5)
    with pytest.raises(ResourceLimitError):
        build_subgroup(gamma1(31))


def test_level_tokens():
    assert parse_level("G1-5") == gamma1(5)
    assert parse_level("G-5") == full_gamma(5)
    assert parse_level("G1-2-3") == LevelSpec(2, 3)
    assert gamma1(5).representable and not gamma1(4).representable and full_gamma(3).representable
