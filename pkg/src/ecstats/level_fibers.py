"""Level-structure fibers over F_q, weighted Hurwitz class numbers and their moments.

The fiber of X_Gamma -> X(1) over a curve E/F_q (q prime to the level) has size
#{injections Z/MN x Z/M -> E(F_q)} / #Aut(E).  Summing fibers by trace gives H_Gamma(a, q).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd
from typing import Callable, Iterable

from .arith import divisors, isqrt_floor_2sqrt
from .cusp_census import rational_cusp_count
from .errors import BadInputError, CoprimalityError
from .ff_curves import CurveCensus, IsoClassRecord
from .levels import LevelSpec


@dataclass(frozen=True, order=True)
class AbelianRank2:
    """Z/m1 x Z/m2 with m2 | m1."""

    m1: int
    m2: int = 1

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1 or self.m1 % self.m2:
            raise BadInputError(f"invalid invariant factors ({self.m1}, {self.m2})")

    @property
    def order(self) -> int:
        return self.m1 * self.m2

    def torsion(self, n: int) -> "AbelianRank2":
        """The n-torsion subgroup."""
        return AbelianRank2(gcd(self.m1, n), gcd(self.m2, n))

    def as_tuple(self) -> tuple[int, int]:
        return (self.m1, self.m2)


def _as_group(g) -> AbelianRank2:
    return g if isinstance(g, AbelianRank2) else AbelianRank2(*g)


@lru_cache(maxsize=None)
def _injections(a: tuple[int, int], b: tuple[int, int]) -> int:
    m1, m2 = a
    n1, n2 = b
    elems = list(product(range(n1), range(n2)))

    def times(k, x):
        return ((k * x[0]) % n1, (k * x[1]) % n2)

    def order(x):
        k = 1
        y = x
        while y != (0, 0):
            y = ((y[0] + x[0]) % n1, (y[1] + x[1]) % n2)
            k += 1
        return k

    orders = {x: order(x) for x in elems}
    firsts = [x for x in elems if orders[x] == m1]
    seconds = [x for x in elems if orders[x] == m2]
    total = 0
    for b1 in firsts:
        span = {times(k, b1) for k in range(m1)}
        for b2 in seconds:
            # injective iff orders are exact and the cyclic images meet trivially
            if all(times(k, b2) not in span for k in range(1, m2)):
                total += 1
    return total


def count_injections(A, B) -> int:
    """Number of injective homomorphisms A -> B of rank <= 2 abelian groups."""
    A, B = _as_group(A), _as_group(B)
    if A.order == 1:
        return 1
    # every image lies in B[m1]
    return _injections(A.as_tuple(), B.torsion(A.m1).as_tuple())


def fiber_size(level: LevelSpec, record: IsoClassRecord) -> Fraction:
    level.require_coprime(record.p)
    return Fraction(count_injections(level.torsion_group, record.group), record.aut_count)


def wps_weight(u0: int, u1: int, z: str, q: int) -> Fraction:
    """Weight of a point of P(u0, u1)(F_q): z is 'interior', 'axis0' ([a,0]), 'axis1' ([0,b]) or 'star'."""
    if z == "star":
        return Fraction(1)
    k = {"interior": gcd(u0, u1), "axis0": u0, "axis1": u1}.get(z)
    if k is None:
        raise BadInputError(f"unknown point tag {z!r}")
    return Fraction(q - 1, gcd(k, q - 1))


@dataclass(frozen=True)
class HGammaTable:
    level: LevelSpec
    q: int
    values: dict = field(repr=False)  # a -> Fraction, every |a| <= 2 sqrt(q)

    def total(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))

    def rows(self):
        for a in sorted(self.values):
            v = self.values[a]
            yield {"q": self.q, "a": a, "H_num": v.numerator, "H_den": v.denominator}


def h_gamma(level: LevelSpec, census: CurveCensus) -> HGammaTable:
    q = census.p
    level.require_coprime(q, 6)
    bound = isqrt_floor_2sqrt(q)
    sums = {a: Fraction(0) for a in range(-bound, bound + 1)}
    for r in census:
        sums[r.trace_a] += fiber_size(level, r)
    scale = Fraction(q - 1, q * q)
    return HGammaTable(level, q, {a: scale * v for a, v in sums.items()})


def moment(table: HGammaTable, R: int) -> Fraction:
    return sum((Fraction(a**R) * v for a, v in table.values.items()), Fraction(0))


def expected_total(level: LevelSpec, q: int) -> Fraction:
    """(q-1)(q+1-c)/q^2 with c the rational cusp count."""
    c = rational_cusp_count(level, q)
    return Fraction((q - 1) * (q + 1 - c), q * q)


def expectation_phi(A, census: CurveCensus, weightfn: Callable[[int], int | Fraction]) -> Fraction:
    """(1/q) * sum over classes E with A -> E(F_q) of weightfn(a_E) / #Aut(E)."""
    A = _as_group(A)
    q = census.p
    if gcd(q, A.m1) != 1:
        raise CoprimalityError(f"q={q} divides the exponent of A={A.as_tuple()}")
    s = Fraction(0)
    for r in census:
        if count_injections(A, r.group) > 0:
            s += Fraction(weightfn(r.trace_a)) / r.aut_count
    return s / q


@dataclass(frozen=True)
class GroupLattice:
    groups: tuple[AbelianRank2, ...]
    omega_tilde: tuple[Fraction, ...]
    omega: tuple[Fraction, ...]

    def __iter__(self):
        return iter(zip(self.groups, self.omega_tilde, self.omega))


def _below(a: AbelianRank2, b: AbelianRank2) -> bool:
    return a != b and b.m1 % a.m1 == 0 and b.m2 % a.m2 == 0 and count_injections(a, b) > 0


def omega_lattice(level: LevelSpec, census: CurveCensus | None = None) -> GroupLattice:
    """Groups between Z/MN x Z/M and Z/MN x Z/MN with their omega coefficients.

    omega-tilde only depends on the group, so no witness curve is needed; the census
    argument is accepted for the coprimality check.
    """
    if census is not None:
        level.require_coprime(census.p, 6)
    L, M = level.torsion_group
    groups = [AbelianRank2(L, d) for d in divisors(L) if d % M == 0]
    groups.sort(key=lambda g: (g.order, g.m2))
    base = level.torsion_group
    tilde = [Fraction(count_injections(base, g)) for g in groups]
    omega: list[Fraction] = []
    for i, g in enumerate(groups):
        omega.append(tilde[i] - sum((omega[j] for j in range(i) if _below(groups[j], g)), Fraction(0)))
    return GroupLattice(tuple(groups), tuple(tilde), tuple(omega))


def moment_identity_sides(level: LevelSpec, census: CurveCensus, R: int) -> tuple[Fraction, Fraction]:
    """Both sides of (q/(q-1)) sum a^R H = sum_i omega_i E_q(a^R Phi_{A_i})."""
    q = census.p
    lhs = Fraction(q, q - 1) * moment(h_gamma(level, census), R)
    lat = omega_lattice(level, census)
    rhs = sum((w * expectation_phi(g, census, lambda a: a**R) for g, _, w in lat), Fraction(0))
    return lhs, rhs


def tables_to_csv(tables: Iterable[HGammaTable]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["q", "a", "H_num", "H_den"], lineterminator="\n")
    w.writeheader()
    for t in tables:
        w.writerows(t.rows())
    return buf.getvalue()


def moments_row(table: HGammaTable, Rs=(0, 1, 2)) -> dict:
    row = {"q": table.q}
    for R in Rs:
        m = moment(table, R)
        row[f"m{R}_num"] = m.numerator
        row[f"m{R}_den"] = m.denominator
    return row
