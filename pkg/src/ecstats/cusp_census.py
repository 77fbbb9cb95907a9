"""Subgroups of SL2(Z/L), their index, and cusps counted as orbits of surjections.

A cusp of X_Gamma corresponds to a surjection (Z/L)^2 -> Z/L, written as a row vector
(a1, a2) with gcd(a1, a2, L) = 1, taken modulo right multiplication by +-Gamma-bar.
Frobenius at q acts by a2 -> q * a2; rational cusps are the orbits it fixes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np

from .arith import factorize
from .errors import CoprimalityError, ResourceLimitError
from .levels import LevelSpec

LEVEL_CEILING = 30

Mat = tuple[int, int, int, int]  # (a, b, c, d) for [[a, b], [c, d]]


def _mul(g: Mat, h: Mat, n: int) -> Mat:
    a, b, c, d = g
    e, f, k, l = h
    return ((a * e + b * k) % n, (a * f + b * l) % n, (c * e + d * k) % n, (c * f + d * l) % n)


def sl2_order(n: int) -> int:
    r = n**3
    for p in factorize(n):
        r = r // (p * p) * (p * p - 1)
    return r


@dataclass(frozen=True)
class SL2ModN:
    N: int
    elements: tuple[Mat, ...] = field(repr=False)

    @classmethod
    def build(cls, n: int, ceiling: int = LEVEL_CEILING) -> "SL2ModN":
        if n > ceiling:
            raise ResourceLimitError(f"level {n} exceeds the ceiling {ceiling}")
        if n == 1:
            return cls(1, ((0, 0, 0, 0),))
        r = np.arange(n)
        a, b, c, d = np.meshgrid(r, r, r, r, indexing="ij")
        ok = (a * d - b * c) % n == 1
        els = tuple(zip(a[ok].tolist(), b[ok].tolist(), c[ok].tolist(), d[ok].tolist()))
        return cls(n, els)


@dataclass(frozen=True)
class SubgroupBar:
    parent: SL2ModN
    elements: frozenset = field(repr=False)
    spec: LevelSpec

    def __len__(self) -> int:
        return len(self.elements)

    def contains(self, g: Mat) -> bool:
        return _member(self.spec, g)

    def is_closed(self) -> bool:
        n = self.parent.N
        els = self.elements
        if n == 1:
            return True
        for g in els:
            a, b, c, d = g
            if (d % n, -b % n, -c % n, a % n) not in els:
                return False
            if any(_mul(g, h, n) not in els for h in els):
                return False
        return True


def _member(spec: LevelSpec, g: Mat) -> bool:
    L, M = spec.level, spec.M
    a, b, c, d = g
    return (a - 1) % L == 0 and c % L == 0 and (d - 1) % L == 0 and b % M == 0


@lru_cache(maxsize=128)
def _sl2(n: int) -> SL2ModN:
    return SL2ModN.build(n)


@lru_cache(maxsize=128)
def build_subgroup(spec: LevelSpec, ceiling: int = LEVEL_CEILING) -> SubgroupBar:
    if spec.level > ceiling:
        raise ResourceLimitError(f"level {spec.level} exceeds the ceiling {ceiling}")
    parent = _sl2(spec.level)
    els = frozenset(g for g in parent.elements if _member(spec, g))
    return SubgroupBar(parent, els, spec)


def index_and_e(spec: LevelSpec) -> tuple[int, Fraction]:
    """Index in SL2(Z) and e = index / 24 (the reduced degree for source weights (1,1))."""
    sub = build_subgroup(spec)
    index = len(sub.parent.elements) // len(sub)
    return index, Fraction(index, 24)


@dataclass(frozen=True)
class CuspOrbit:
    representatives: tuple[tuple[int, int], ...]

    @property
    def rep(self) -> tuple[int, int]:
        return self.representatives[0]

    def __len__(self) -> int:
        return len(self.representatives)


def surjections(n: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(n) if gcd(gcd(a, b), n) == 1]


def _generators(elements: frozenset, n: int) -> list[Mat]:
    """A small generating set of the group, picked greedily."""
    if n == 1:
        return []
    gens: list[Mat] = []
    ident = (1 % n, 0, 0, 1 % n)
    span = {ident}
    for g in sorted(elements):
        if g in span:
            continue
        gens.append(g)
        frontier = list(span)
        while frontier:
            new = []
            for h in frontier:
                for s in gens:
                    x = _mul(h, s, n)
                    if x not in span:
                        span.add(x)
                        new.append(x)
            frontier = new
        if len(span) == len(elements):
            break
    return gens


def plus_minus(sub: SubgroupBar) -> frozenset:
    n = sub.parent.N
    return sub.elements | frozenset(tuple((-x) % n for x in g) for g in sub.elements)


@lru_cache(maxsize=128)
def cusp_orbits(spec: LevelSpec) -> tuple[CuspOrbit, ...]:
    sub = build_subgroup(spec)
    n = spec.level
    if n == 1:
        return (CuspOrbit(((0, 0),)),)
    gens = _generators(plus_minus(sub), n)
    seen: set[tuple[int, int]] = set()
    orbits = []
    for start in surjections(n):
        if start in seen:
            continue
        orbit = {start}
        frontier = [start]
        while frontier:
            new = []
            for a1, a2 in frontier:
                for a, b, c, d in gens:
                    v = ((a1 * a + a2 * c) % n, (a1 * b + a2 * d) % n)
                    if v not in orbit:
                        orbit.add(v)
                        new.append(v)
            frontier = new
        seen |= orbit
        orbits.append(CuspOrbit(tuple(sorted(orbit))))
    return tuple(sorted(orbits, key=lambda o: o.rep))


@lru_cache(maxsize=128)
def _orbit_index(spec: LevelSpec) -> dict[tuple[int, int], int]:
    return {v: i for i, o in enumerate(cusp_orbits(spec)) for v in o.representatives}


def rational_cusp_count(spec: LevelSpec, q: int) -> int:
    n = spec.level
    if gcd(q, n) != 1:
        raise CoprimalityError(f"q={q} is not coprime to the level {n}")
    return sum(1 for o in rational_cusps(spec, q))


def rational_cusps(spec: LevelSpec, q: int) -> list[CuspOrbit]:
    """Orbits fixed by a2 -> q a2 (hence by the whole cyclic group <q>)."""
    n = spec.level
    if gcd(q, n) != 1:
        raise CoprimalityError(f"q={q} is not coprime to the level {n}")
    idx = _orbit_index(spec)
    out = []
    for i, o in enumerate(cusp_orbits(spec)):
        a1, a2 = o.rep
        if idx[(a1 % n, (q * a2) % n)] == i:
            out.append(o)
    return out


def cusp_report_row(spec: LevelSpec, q: int) -> dict:
    index, e = index_and_e(spec)
    return {"spec": spec.token, "N": spec.level, "q": q,
            "orbit_count": len(cusp_orbits(spec)),
            "rational_count": rational_cusp_count(spec, q),
            "index": index, "e_gamma": str(e)}
