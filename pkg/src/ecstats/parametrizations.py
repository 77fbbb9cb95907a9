"""Universal families with a rational point of order N, from the Tate normal form.

E(b, c): y^2 + (1-c) x y - b y = x^3 - b x^2 has the point (0, 0) of order N when (b, c)
satisfy the standard order-N relation.  Scaling the a-invariants by mu^i with
mu = t0^e * lam(t1/t0) turns them into binary forms of degree i*e; the short model is
y^2 = x^3 - 27 c4 x - 54 c6 with the torsion point (3 b2, 108 a3).

N = 3 and N = 4 have no Tate parameter on P^1; they use weighted sources
P(1,3): y^2 + s x y + r y = x^3 and P(1,2): y^2 + s x y + r s y = x^3 + r x^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Sequence

import sympy as sp

from .arith import iroot
from .errors import UnsupportedLevelError
from .levels import LevelSpec
from .wps_rational import WpsMorphism

_t, _t0, _t1 = sp.symbols("t t0 t1")

# N -> (b(t), c(t), lam(t)); lam clears the denominators of the a-invariants
_TATE = {
    5: (_t, _t, 1),
    6: (_t + _t**2, _t, 1),
    7: (_t**3 - _t**2, _t**2 - _t, 1),
    8: ((2 * _t - 1) * (_t - 1), (2 * _t - 1) * (_t - 1) / _t, _t),
    9: (_t**2 * (_t - 1) * (_t**2 - _t + 1), _t**2 * (_t - 1), 1),
    10: (_t**3 * (_t - 1) * (2 * _t - 1) / (_t**2 - 3 * _t + 1) ** 2,
         -_t * (_t - 1) * (2 * _t - 1) / (_t**2 - 3 * _t + 1), _t**2 - 3 * _t + 1),
    12: (_t * (2 * _t - 1) * (2 * _t**2 - 2 * _t + 1) * (3 * _t**2 - 3 * _t + 1) / (_t - 1) ** 4,
         -_t * (2 * _t - 1) * (3 * _t**2 - 3 * _t + 1) / (_t - 1) ** 3, (_t - 1) ** 3),
}

SUPPORTED_N = (3, 4, 5, 6, 7, 8, 9, 10, 12)

Poly2 = tuple[tuple[tuple[int, int], int], ...]  # ((i, j), c) for c * x0^i * x1^j


def _to_poly2(expr) -> Poly2:
    P = sp.Poly(sp.expand(expr), _t0, _t1)
    return tuple(sorted(((int(m[0]), int(m[1])), int(c)) for m, c in P.terms()))


def eval_poly2(P: Poly2, x0, x1):
    return sum(c * x0**i * x1**j for (i, j), c in P)


@dataclass(frozen=True)
class FamilyParametrization:
    level: LevelSpec
    source: tuple[int, int]
    e: int  # reduced degree: deg f = 4e, deg g = 6e in the source weights
    a_invariants: tuple[Poly2, ...] = field(repr=False)  # a1, a2, a3, a4, a6
    f_poly: Poly2 = field(repr=False)
    g_poly: Poly2 = field(repr=False)

    @property
    def morphism(self) -> WpsMorphism:
        return WpsMorphism(self.source, (4, 6), (self.f_poly, self.g_poly), self.e)

    def curve(self, x0: int, x1: int) -> tuple[int, int]:
        return eval_poly2(self.f_poly, x0, x1), eval_poly2(self.g_poly, x0, x1)

    def torsion_point(self, x0: int, x1: int) -> tuple[int, int]:
        a1, a2, a3 = (eval_poly2(P, x0, x1) for P in self.a_invariants[:3])
        b2 = a1 * a1 + 4 * a2
        return 3 * b2, 108 * a3

    def discriminant(self, x0: int, x1: int) -> int:
        f, g = self.curve(x0, x1)
        return 4 * f**3 + 27 * g**2


def _short_model(a1, a2, a3, a4, a6):
    b2 = a1**2 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3**2 + 4 * a6
    c4 = b2**2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    return sp.expand(-27 * c4), sp.expand(-54 * c6)


@lru_cache(maxsize=None)
def builtin_parametrization(level: LevelSpec) -> FamilyParametrization:
    if level.M != 1 or level.N not in SUPPORTED_N:
        raise UnsupportedLevelError(f"no stored parametrization for {level.token}; "
                                    f"supported: Gamma1(N) for N in {SUPPORTED_N}")
    N = level.N
    if N == 3:
        source = (1, 3)
        ainv = (_t0, 0, _t1, 0, 0)
    elif N == 4:
        source = (1, 2)
        ainv = (_t0, _t1, _t0 * _t1, 0, 0)
    else:
        from .cusp_census import index_and_e

        source = (1, 1)
        e = int(index_and_e(level)[1])
        b, c, lam = _TATE[N]
        mu = _t0**e * sp.sympify(lam).subs(_t, _t1 / _t0)
        raw = (1 - c, -b, -b, 0, 0)
        ainv = []
        for i, a in zip((1, 2, 3, 4, 6), raw):
            expr = sp.cancel(sp.sympify(a).subs(_t, _t1 / _t0) * mu**i)
            num, den = sp.fraction(expr)
            if den != 1:
                raise AssertionError(f"a{i} for N={N} is not polynomial after scaling")
            ainv.append(sp.expand(num))
        ainv = tuple(ainv)
    f, g = _short_model(*ainv)
    P = sp.Poly(f, _t0, _t1)
    deg_f = max(m[0] * source[0] + m[1] * source[1] for m in P.monoms())
    e = deg_f // 4
    fam = FamilyParametrization(level, source, e, tuple(_to_poly2(a) for a in ainv),
                                _to_poly2(f), _to_poly2(g))
    fam.morphism  # weighted homogeneity check
    return fam


def expected_reduced_degree(level: LevelSpec, source: Sequence[int]) -> Fraction:
    """u0 u1 [SL2(Z) : Gamma] / 24."""
    from .cusp_census import index_and_e

    return Fraction(source[0] * source[1] * index_and_e(level)[0], 24)


# ---------------------------------------------------------------- exact group law over Q

def _ec_add_q(P, Q, A):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and y1 == -y2:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + A) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return x3, lam * (x1 - x3) - y1


def point_order(P, A, max_order: int = 64) -> int | None:
    """Order of a rational point on y^2 = x^3 + A x + B, or None if it exceeds max_order."""
    A = Fraction(A)
    P = (Fraction(P[0]), Fraction(P[1]))
    Q = P  # Q = k P at the top of the loop
    for k in range(1, max_order + 1):
        if Q is None:
            return k
        Q = _ec_add_q(Q, P, A)
    return None


def _order_exact(P, A, n) -> bool:
    A = Fraction(A)
    P = (Fraction(P[0]), Fraction(P[1]))
    Q = P
    for k in range(1, n):
        if Q is None:
            return False
        Q = _ec_add_q(Q, P, A)
    return Q is None


@dataclass(frozen=True)
class TorsionCertificate:
    level: LevelSpec
    checked: int
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures and self.checked > 0


def torsion_certificate(fam: FamilyParametrization, samples: int = 50, seed: int = 0,
                        spread: int = 1000) -> TorsionCertificate:
    """Check the explicit point on random fibers: on the curve, order exactly N, Nagell-Lutz."""
    import random

    rng = random.Random(seed)
    N = fam.level.N
    failures = []
    checked = 0
    while checked < samples:
        x0 = rng.randint(1, spread)
        x1 = rng.randint(-spread**fam.source[1], spread**fam.source[1])
        f, g = fam.curve(x0, x1)
        disc = 4 * f**3 + 27 * g * g
        if disc == 0:
            continue
        checked += 1
        x, y = fam.torsion_point(x0, x1)
        if y * y != x**3 + f * x + g:
            failures.append((x0, x1, "not on curve"))
        elif not _order_exact((x, y), f, N):
            failures.append((x0, x1, "order differs from N"))
        elif y != 0 and disc % (y * y) != 0:
            failures.append((x0, x1, "Nagell-Lutz divisibility fails"))
    return TorsionCertificate(fam.level, checked, tuple(failures))
