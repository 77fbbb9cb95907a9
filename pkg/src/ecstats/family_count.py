"""Exact counting of parameter points of bounded height, with residue classes mod q.

Parameter points are minimal integer vectors (x0, x1) of P(1, u1)(Q) with x0 >= 0 in
canonical sign.  The image curve (f(x), g(x)) has height

    H = max(|f(x)|^(1/4), |g(x)|^(1/6)) / delta(x),

where the defect delta(x) is supported on a few bad primes and depends only on x modulo a
power of each of them.  Rows of fixed x0 are handled at once: by weighted homogeneity
f(x0, x1) = x0^(4e) F(x1 / x0^u1), so the admissible x1 form a few intervals that are
located in floating point and then fixed exactly with integer arithmetic.  Inside an
interval, points are counted by arithmetic progressions (defect classes, Moebius for
minimality, residue of x1 mod q), never one by one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np
import sympy as sp

from .arith import crt_pair, factorize, iroot, squarefree_divisors_with_mobius
from .errors import BadInputError, InvariantViolation, ResourceLimitError
from .parametrizations import FamilyParametrization, eval_poly2

# ---------------------------------------------------------------- local defect tables


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@lru_cache(maxsize=None)
def candidate_bad_primes(fam: FamilyParametrization) -> tuple[int, ...]:
    """Primes where f and g can vanish together on a minimal point."""
    y = sp.symbols("y")
    F = sum(c * y**j for (i, j), c in fam.f_poly)
    G = sum(c * y**j for (i, j), c in fam.g_poly)
    res = int(sp.resultant(sp.Poly(F, y), sp.Poly(G, y)))
    lead = math.gcd(abs(int(eval_poly2(fam.f_poly, 0, 1))), abs(int(eval_poly2(fam.g_poly, 0, 1))))
    primes = set(factorize(res)) | set(factorize(lead)) | set(factorize(6 * fam.level.level))
    return tuple(sorted(primes))


def _table_is_trivial(fam: FamilyParametrization, p: int, budget: int = 20000) -> bool:
    """True if the full table at p is small enough to build and has no positive defect."""
    u0, u1 = fam.source
    stack = [(1, c0, c1) for c0 in range(p) for c1 in range(p)]
    seen = 0
    while stack:
        seen += 1
        if seen > budget:
            return False
        j, c0, c1 = stack.pop()
        mod = p**j
        s0 = (c0 % p**u0 == 0) if j >= u0 else (None if c0 % mod == 0 else False)
        s1 = (c1 % p**u1 == 0) if j >= u1 else (None if c1 % mod == 0 else False)
        if s0 is True and s1 is True:
            continue
        f, g = (v % mod for v in fam.curve(c0, c1))
        k = _decide_k(f, g, p, j)
        if k is not None and k > 0:
            return False
        if k is None or not (s0 is False or s1 is False):
            stack.extend((j + 1, c0 + a * mod, c1 + b * mod) for a in range(p) for b in range(p))
    return True


@lru_cache(maxsize=None)
def defect_primes(fam: FamilyParametrization) -> tuple[int, ...]:
    """Candidate primes that cannot be ruled out as carrying a defect."""
    return tuple(p for p in candidate_bad_primes(fam) if not _table_is_trivial(fam, p))


def _decide_k(f: int, g: int, p: int, j: int, af: int = 0, ag: int = 0) -> int | None:
    """k = min(v(F) // 4, v(G) // 6) where F = p^af f and G = p^ag g, with f, g known mod p^j.

    Returns None while undetermined."""
    vf = af + _vp(f, p) if f else None  # None: at least af + j
    vg = ag + _vp(g, p) if g else None
    if vf is not None and vg is not None:
        return min(vf // 4, vg // 6)
    if vf is not None and vf // 4 <= (ag + j) // 6:
        return vf // 4
    if vg is not None and vg // 6 <= (af + j) // 4:
        return vg // 6
    return None


def _merge_classes(entries, p):
    """Coarsen a partition of residue classes: p siblings with equal k become their parent."""
    cur = set(entries)
    while cur:
        J = max(m for m, _, _ in cur)
        if J == 1:
            break
        groups = {}
        for m, c, k in cur:
            if m == J:
                groups.setdefault((c % (J // p), k), []).append((m, c, k))
        merged = False
        for (c, k), g in groups.items():
            if len(g) == p:
                cur.difference_update(g)
                cur.add((J // p, c, k))
                merged = True
        if not merged:
            break
    return sorted(cur)


class RowDefects:
    """Defect classes of x1 for a fixed row x0 at one prime p.

    Refinement only splits x1, since x0 is exact.  A row result depends on x0 modulo
    p^depth, where depth is the deepest level used, and is cached under that key.
    """

    def __init__(self, fam: FamilyParametrization, p: int, max_depth: int = 40):
        self.fam = fam
        self.p = p
        self.max_depth = max_depth
        self._cache: dict[int, dict[int, tuple]] = {}  # depth -> {x0 mod p^depth: classes}

    def row(self, x0: int) -> tuple:
        for d, table in self._cache.items():
            hit = table.get(x0 % self.p**d)
            if hit is not None:
                return hit
        classes, depth = self._compute(x0)
        self._cache.setdefault(depth, {})[x0 % self.p**depth] = classes
        return classes

    def _compute(self, x0: int):
        p = self.p
        u0, u1 = self.fam.source
        geo = _RowGeometry(self.fam, x0)
        x0_div = x0 % p**u0 == 0
        depth = max(1, u0) if x0_div else 1
        if x0 == 0:
            depth = self.max_depth  # the key must separate x0 = 0 from its neighbours
        # pull the p-part of the content out of both row polynomials
        af = min((_vp(c, p) for c in geo.fc if c), default=0)
        ag = min((_vp(c, p) for c in geo.gc if c), default=0)
        fc = [c // p**af for c in geo.fc]
        gc = [c // p**ag for c in geo.gc]
        out = []
        used = 1
        stack = [(1, c) for c in range(p)]
        while stack:
            j, c1 = stack.pop()
            if j > self.max_depth:
                raise InvariantViolation(f"defect at p={p} undetermined past depth {self.max_depth}")
            mod = p**j
            if x0_div:
                if j >= u1:
                    if c1 % p**u1 == 0:
                        continue
                    ok_min = True
                else:
                    ok_min = c1 % mod != 0
            else:
                ok_min = True
            f = _horner(fc, c1) % mod
            g = _horner(gc, c1) % mod
            k = _decide_k(f, g, p, j, af, ag)
            if k is not None and ok_min:
                out.append((mod, c1, k))
                used = max(used, j)
            else:
                stack.extend((j + 1, c1 + a * mod) for a in range(p))
        merged = tuple(_merge_classes(out, p))
        # f / p^af mod p^j depends on x0 mod p^(af + j), and af itself on x0 mod p^(af + 1)
        depth = max(depth, used + max(af, ag) + 1)
        return merged, min(depth, self.max_depth)


def _combine(lists):
    """CRT product of per-prime class lists -> [(modulus, residue, defect)]."""
    combos = [(1, 0, 1)]
    for p, entries in lists:
        new = []
        for M, r, D in combos:
            for m, c, k in entries:
                rr, MM = crt_pair(r, M, c, m)
                new.append((MM, rr, D * p**k))
        combos = new
    return combos


# ---------------------------------------------------------------- degenerate parameters


@lru_cache(maxsize=None)
def degenerate_points(fam: FamilyParametrization) -> tuple[tuple[int, int], ...]:
    """Minimal parameter points with 4f^3 + 27g^2 = 0 (the cusps defined over Q)."""
    from .wps_rational import normalize

    u0, u1 = fam.source
    y = sp.symbols("y")
    F = sum(c * y**j for (i, j), c in fam.f_poly)
    G = sum(c * y**j for (i, j), c in fam.g_poly)
    disc = sp.Poly(sp.expand(4 * F**3 + 27 * G**2), y)
    pts = set()
    for fac, _ in sp.factor_list(disc.as_expr())[1]:
        P = sp.Poly(fac, y)
        if P.degree() != 1:
            continue
        a, b = (int(c) for c in P.all_coeffs())  # a*y + b
        r = Fraction(-b, a)
        s = 1
        for p, ev in factorize(r.denominator).items():
            s *= p ** (-(-ev // u1))
        x1 = s**u1 * r
        pts.add(normalize(fam.source, (s, int(x1))).coords)
    if fam.discriminant(0, 1) == 0 and u1 == 1:
        pts.add((0, 1))
    return tuple(sorted(pts))


def row0_degenerate(fam: FamilyParametrization) -> bool:
    """For u1 > 1 the discriminant on x0 = 0 is a monomial in x1, so the row is all or nothing."""
    return fam.source[1] > 1 and fam.discriminant(0, 1) == 0


# ---------------------------------------------------------------- interval search


def _trim(P) -> np.ndarray:
    return np.trim_zeros(np.asarray(P, dtype=float), "f")


def _real_roots_batch(P: np.ndarray, shifts: np.ndarray) -> list[np.ndarray]:
    """Real roots of P(y) - s for every s in shifts (P high-first, degree >= 1)."""
    d = P.size - 1
    n = shifts.size
    if d == 1:
        r = ((shifts - P[1]) / P[0]).reshape(n, 1)
        return list(r)
    C = np.zeros((n, d, d))
    C[:, 0, :] = -P[1:] / P[0]
    C[:, 0, -1] = -(P[-1] - shifts) / P[0]
    idx = np.arange(d - 1)
    C[:, idx + 1, idx] = 1.0
    Z = np.linalg.eigvals(C)
    # near-real roots count as real: a spurious edge only splits an interval
    real = np.abs(Z.imag) <= 1e-4 * np.maximum(1.0, np.abs(Z.real))
    return [z.real[m] for z, m in zip(Z, real)]


def _polyval(P, y: float) -> float:
    acc = 0.0
    for c in P:
        acc = acc * y + c
    return acc


def _intervals_from_edges(P, c: float, pts) -> list[tuple[float, float]]:
    edges = [-math.inf] + sorted(pts) + [math.inf]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if a == -math.inf and b == math.inf:
            mid = 0.0
        elif a == -math.inf:
            mid = b - 1.0 - abs(b)
        elif b == math.inf:
            mid = a + 1.0 + abs(a)
        else:
            mid = 0.5 * (a + b)
        if abs(_polyval(P, mid)) <= c:
            if out and out[-1][1] >= a:
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
    return out


def _sublevel(coeffs_high_first, c: float) -> list[tuple[float, float]]:
    """Real intervals where |P(y)| <= c."""
    return _sublevel_batch(coeffs_high_first, np.array([float(c)]))[0]


def _sublevel_batch(coeffs_high_first, cs: np.ndarray) -> list[list[tuple[float, float]]]:
    P = _trim(coeffs_high_first)
    if P.size == 0:
        return [[(-math.inf, math.inf)] for _ in cs]
    if P.size == 1:
        return [[(-math.inf, math.inf)] if abs(P[0]) <= c else [] for c in cs]
    plus = _real_roots_batch(P, cs)
    minus = _real_roots_batch(P, -cs)
    Pl = [float(v) for v in P]
    return [_intervals_from_edges(Pl, float(c), list(rp) + list(rm)) for c, rp, rm in zip(cs, plus, minus)]


def _intersect(I, J):
    out = []
    for a, b in I:
        for c, d in J:
            lo, hi = max(a, c), min(b, d)
            if lo <= hi:
                out.append((lo, hi))
    return sorted(out)


def _horner(coeffs_low_first, x):
    acc = 0
    for c in reversed(coeffs_low_first):
        acc = acc * x + c
    return acc


class _RowGeometry:
    """Exact and approximate evaluation of f, g along one row x0."""

    def __init__(self, fam: FamilyParametrization, x0: int):
        self.x0 = x0
        deg_f = max(j for (i, j), c in fam.f_poly)
        deg_g = max(j for (i, j), c in fam.g_poly)
        self.fc = [0] * (deg_f + 1)
        self.gc = [0] * (deg_g + 1)
        for (i, j), c in fam.f_poly:
            self.fc[j] += c * x0**i
        for (i, j), c in fam.g_poly:
            self.gc[j] += c * x0**i

    def feasible(self, x1: int, bound4: Fraction, bound6: Fraction) -> bool:
        f = abs(_horner(self.fc, x1))
        if f * bound4.denominator > bound4.numerator:
            return False
        g = abs(_horner(self.gc, x1))
        return g * bound6.denominator <= bound6.numerator


def _fix_interval(ok, a: float, b: float, lo_limit: int | None, hi_limit: int | None):
    """Exact integer run approximated by [a, b]; ok is the exact membership test."""
    lo = math.ceil(a) if a != -math.inf else lo_limit
    hi = math.floor(b) if b != math.inf else hi_limit
    if lo_limit is not None:
        lo = max(lo, lo_limit)
    if hi_limit is not None:
        hi = min(hi, hi_limit)
    if lo > hi + 1:
        lo, hi = hi + 1, lo - 1  # tolerate float overshoot; re-searched below
    # locate any member near the approximate interval
    seed = None
    for cand in (lo, hi, (lo + hi) // 2):
        if ok(cand):
            seed = cand
            break
    if seed is None:
        if hi - lo <= 64:
            for cand in range(lo, hi + 1):
                if ok(cand):
                    seed = cand
                    break
        if seed is None:
            return None

    def inside(x):
        return (lo_limit is None or x >= lo_limit) and (hi_limit is None or x <= hi_limit) and ok(x)

    def edge(start, direction):
        # largest step s with start + direction * s still a member; the limits keep the
        # doubling from jumping over a gap into a neighbouring run
        step = 1
        good = 0
        while inside(start + direction * step):
            good = step
            step *= 2
        bad = step
        while bad - good > 1:
            mid = (good + bad) // 2
            if inside(start + direction * mid):
                good = mid
            else:
                bad = mid
        return start + direction * good

    lo, hi = edge(seed, -1), edge(seed, 1)
    if lo_limit is not None:
        lo = max(lo, lo_limit)
    if hi_limit is not None:
        hi = min(hi, hi_limit)
    return (lo, hi) if lo <= hi else None


# ---------------------------------------------------------------- the counter


def _as_fraction(X) -> Fraction:
    if isinstance(X, float):
        return Fraction(X).limit_denominator(10**6)
    return Fraction(X)


@lru_cache(maxsize=None)
def _min_height_on_row(fam: FamilyParametrization) -> float:
    """min over real y of max(|F(y)|^(1/4), |G(y)|^(1/6)), with F = f(1, .), G = g(1, .)."""
    from scipy.optimize import minimize_scalar

    F = np.zeros(max(j for (i, j), c in fam.f_poly) + 1)
    G = np.zeros(max(j for (i, j), c in fam.g_poly) + 1)
    for (i, j), c in fam.f_poly:
        F[j] += c
    for (i, j), c in fam.g_poly:
        G[j] += c

    def h(y):
        return max(abs(np.polyval(F[::-1], y)) ** 0.25, abs(np.polyval(G[::-1], y)) ** (1 / 6))

    grid = np.concatenate([np.linspace(-50, 50, 200001), np.geomspace(50, 1e8, 2000), -np.geomspace(50, 1e8, 2000)])
    vals = np.maximum(np.abs(np.polyval(F[::-1], grid)) ** 0.25, np.abs(np.polyval(G[::-1], grid)) ** (1 / 6))
    best = float(vals.min())
    i = int(vals.argmin())
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(h, bounds=(min(lo, hi), max(lo, hi)), method="bounded", options={"xatol": 1e-12})
    return min(best, float(res.fun))


@lru_cache(maxsize=32)
def _spf_sieve(n: int) -> np.ndarray:
    """Smallest prime factor of every integer up to n."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, math.isqrt(n) + 1):
        if spf[i] == 0:
            block = spf[i * i:: i]
            block[block == 0] = i
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    return spf


def _prime_factors(n: int, spf: np.ndarray) -> list[int]:
    out = []
    while n > 1:
        p = int(spf[n])
        out.append(p)
        while n % p == 0:
            n //= p
    return out


@dataclass
class Observer:
    """Residue labels of parameter points mod a good prime q.

    labels[c0, c1] is the class id of the reduction of (f(c), g(c)) in P(4,6)(F_q).
    """

    q: int
    labels: np.ndarray
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.counts = np.zeros(int(self.labels.max()) + 1, dtype=object)


@dataclass
class CountResult:
    X: Fraction
    total: int
    rows: int
    observers: dict  # q -> counts per label (Python ints)
    completeness_ok: bool


class FamilyCounter:
    def __init__(self, fam: FamilyParametrization, margin: float = 1.05):
        if fam.source[0] != 1:
            raise BadInputError("only sources P(1, u1) are supported")
        self.fam = fam
        self.u1 = fam.source[1]
        self.e = fam.e
        self.margin = margin
        self.bad = defect_primes(fam)
        self.indices = [RowDefects(fam, p) for p in self.bad]
        self.F = np.zeros(max(j for (i, j), c in fam.f_poly) + 1)
        self.G = np.zeros(max(j for (i, j), c in fam.g_poly) + 1)
        for (i, j), c in fam.f_poly:
            self.F[j] += c
        for (i, j), c in fam.g_poly:
            self.G[j] += c
        self.degenerate = degenerate_points(fam)
        self._chunks: dict = {}
        ds = {1}
        for idx in self.indices:
            ks = {k for x0 in range(idx.p**4) for _, _, k in idx.row(x0)}
            ds = {d * idx.p**k for d in ds for k in ks}
        self.max_defect = max(ds)

    # -- row data
    def row_classes(self, x0: int):
        """{D: [(Mb, rb)]} for the defect classes of x1 on this row."""
        lists = [(idx.p, idx.row(x0)) for idx in self.indices]
        out: dict[int, list] = {}
        for M, r, D in _combine(lists):
            out.setdefault(D, []).append((M, r))
        return out

    def row_intervals(self, x0: int, X: Fraction, D: int, geo: _RowGeometry):
        b4 = (X * D) ** 4
        b6 = (X * D) ** 6

        def ok(x1):
            return geo.feasible(x1, b4, b6)

        if x0 == 0:
            if self.u1 == 1:
                return [(1, 1)] if ok(1) else []
            Fc = np.array(geo.fc[::-1], dtype=float)
            Gc = np.array(geo.gc[::-1], dtype=float)
            I = _intersect(_sublevel(Fc, float(b4)), _sublevel(Gc, float(b6)))
            lo_lim = 1 if self.u1 % 2 else None
            res = []
            for (a, b), (lo_cap, hi_cap) in zip(I, _caps(I, 1.0)):
                if lo_lim is not None and b < lo_lim:
                    continue
                if lo_lim is not None:
                    lo_cap = lo_lim if lo_cap is None else max(lo_cap, lo_lim)
                fixed = _fix_interval(ok, a, b, lo_cap, hi_cap)
                if fixed:
                    res.append(fixed)
            return _merge([(lo, hi) for lo, hi in res if not (lo <= 0 <= hi)] +
                          _split_zero(res))
        s = float(x0) ** self.u1
        I = self._float_intervals(x0, X, D)
        res = []
        for (a, b), (lo_cap, hi_cap) in zip(I, _caps(I, s)):
            fixed = _fix_interval(ok, a * s, b * s, lo_cap, hi_cap)
            if fixed:
                res.append(fixed)
        return _merge(res)

    _CHUNK = 2048

    def _float_intervals(self, x0: int, X: Fraction, D: int):
        """Approximate y = x1 / x0^u1 intervals, computed for a block of rows at a time."""
        key = (X, D, x0 // self._CHUNK)
        block = self._chunks.get(key)
        if block is None:
            if len(self._chunks) > 64:
                self._chunks.clear()
            start = max(1, key[2] * self._CHUNK)
            rows = np.arange(start, (key[2] + 1) * self._CHUNK, dtype=float)
            XD = float(X * D)
            # (XD / x0^e)^4 and ^6, computed in logs to stay in range
            la = 4 * (math.log(XD) - self.e * np.log(rows))
            lb = 6 * (math.log(XD) - self.e * np.log(rows))
            If = _sublevel_batch(self.F[::-1], np.exp(la))
            Ig = _sublevel_batch(self.G[::-1], np.exp(lb))
            block = {int(r): _intersect(a, b) for r, a, b in zip(rows, If, Ig)}
            self._chunks[key] = block
        return block[x0]

    def row_limit(self, X: Fraction) -> int:
        m0 = _min_height_on_row(self.fam)
        return int((float(X) * self.max_defect / (m0 * 0.98)) ** (1.0 / self.e) * self.margin) + 2

    # -- main loop
    def count(self, X, qs: Sequence[int] = (), label_tables: dict | None = None,
              max_rows: int = 5_000_000) -> CountResult:
        X = _as_fraction(X)
        if X <= 0:
            return CountResult(X, 0, 0, {q: np.zeros(1, dtype=object) for q in qs}, True)
        obs = []
        for q in qs:
            if q in self.bad or q in candidate_bad_primes(self.fam):
                raise BadInputError(f"q={q} is a bad prime of the family")
            labels = label_tables[q] if label_tables and q in label_tables else observer_labels(self.fam, q)
            obs.append(Observer(q, labels))
        last = self.row_limit(X)
        if last > max_rows:
            raise ResourceLimitError(f"{last} rows exceed the ceiling {max_rows}")
        spf = _spf_sieve(max(last, 2))
        bad_set = set(self.bad)
        total = 0
        tail_empty = True
        degenerate_by_row: dict[int, list[int]] = {}
        for x0, x1 in self.degenerate:
            degenerate_by_row.setdefault(x0, []).append(x1)
        first = 1 if row0_degenerate(self.fam) else 0
        for x0 in range(first, last + 1):
            geo = _RowGeometry(self.fam, x0)
            classes = self.row_classes(x0)
            if max(classes) > self.max_defect:
                tail_empty = False  # the row bound assumed a smaller defect
            if x0 == 0:
                mob = self._row0_mobius(X, classes, geo, bad_set)
            else:
                ps = [p for p in _prime_factors(x0, spf) if p not in bad_set]
                mob = squarefree_divisors_with_mobius(ps)
            row_total = 0
            per_q = [np.zeros(o.q, dtype=np.int64) for o in obs]
            for D in sorted(classes):
                intervals = self.row_intervals(x0, X, D, geo)
                if not intervals:
                    continue
                for Mb, rb in classes[D]:
                    for m, mu in mob:
                        mu_pow = m**self.u1
                        inv_b = pow(mu_pow, -1, Mb) if Mb > 1 else 0
                        ry = rb * inv_b % Mb if Mb > 1 else 0
                        for lo, hi in intervals:
                            ylo = -((-lo) // mu_pow)
                            yhi = hi // mu_pow
                            if ylo > yhi:
                                continue
                            row_total += mu * _ap_count(ylo, yhi, Mb, ry)
                            for o, acc in zip(obs, per_q):
                                acc += mu * _ap_count_by_residue(ylo, yhi, Mb, ry, o.q, mu_pow)
            for x1 in degenerate_by_row.get(x0, ()):
                D = self._defect_of(x0, x1)
                if geo.feasible(x1, (X * D) ** 4, (X * D) ** 6):
                    row_total -= 1
                    for o, acc in zip(obs, per_q):
                        acc[x1 % o.q] -= 1
            total += row_total
            for o, acc in zip(obs, per_q):
                lab = o.labels[x0 % o.q]
                np.add.at(o.counts, lab, acc.astype(object))
            if x0 == last and row_total:
                tail_empty = False
        # completeness self-test: rows past the bound must be empty even at the largest defect
        for x0 in range(last + 1, int(last * 1.05) + 6):
            geo = _RowGeometry(self.fam, x0)
            if self.row_intervals(x0, X, self.max_defect, geo):
                tail_empty = False
                break
        return CountResult(X, total, last + 1, {o.q: o.counts for o in obs}, tail_empty)

    def _defect_of(self, x0: int, x1: int) -> int:
        D = 1
        for idx in self.indices:
            for M, c, k in idx.row(x0):
                if x1 % M == c:
                    D *= idx.p**k
                    break
        return D

    def _row0_mobius(self, X: Fraction, classes, geo, bad_set):
        if self.u1 == 1:
            return [(1, 1)]
        big = 0
        for D in classes:
            for lo, hi in self.row_intervals(0, X, D, geo):
                big = max(big, abs(lo), abs(hi))
        mmax = iroot(big, self.u1)
        if mmax < 2:
            return [(1, 1)]
        out = []
        spf = _spf_sieve(max(mmax, 2))
        for m in range(1, mmax + 1):
            ps = _prime_factors(m, spf) if m > 1 else []
            if any(p in bad_set for p in ps):
                continue
            if len(ps) and math.prod(ps) != m:
                continue
            out.append((m, -1 if len(ps) % 2 else 1))
        return out


def _caps(I, s: float):
    """Integer search limits for each interval: halfway to its neighbours, scaled by s."""
    caps = []
    for i, (a, b) in enumerate(I):
        lo = math.floor((I[i - 1][1] + a) / 2 * s) + 1 if i else None
        hi = math.floor((b + I[i + 1][0]) / 2 * s) if i + 1 < len(I) else None
        caps.append((lo, hi))
    return caps


def _merge(iv):
    iv = sorted(iv)
    out = []
    for lo, hi in iv:
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _split_zero(iv):
    out = []
    for lo, hi in iv:
        if lo <= 0 <= hi:
            if lo <= -1:
                out.append((lo, -1))
            if hi >= 1:
                out.append((1, hi))
    return out


def _ap_count(lo: int, hi: int, M: int, r: int) -> int:
    """#{y in [lo, hi] : y = r mod M}."""
    if M == 1:
        return hi - lo + 1
    return (hi - r) // M - (lo - 1 - r) // M


def _ap_count_by_residue(lo: int, hi: int, Mb: int, ry: int, q: int, mu_pow: int) -> np.ndarray:
    """Counts of y in [lo, hi] with y = ry mod Mb, split by x1 = mu_pow * y mod q."""
    out = np.zeros(q, dtype=np.int64)
    if mu_pow % q == 0:
        out[0] = _ap_count(lo, hi, Mb, ry)
        return out
    # y runs over one residue class mod Mb*q for each residue of y mod q
    M = Mb * q
    ys = np.arange(q, dtype=np.int64)
    if Mb > 1:
        # CRT: y = ry (Mb), y = t (q)
        e_b = q * pow(q, -1, Mb)
        e_q = Mb * pow(Mb, -1, q)
        R = (ry * e_b + ys * e_q) % M
    else:
        R = ys
    cnt = (hi - R) // M - (lo - 1 - R) // M
    rho = (mu_pow % q) * ys % q
    out[rho] = cnt
    return out


# ---------------------------------------------------------------- classes of P(4,6)(F_q)


@dataclass(frozen=True)
class P46Classes:
    """Class ids for all pairs (A, B) in F_q^2.

    0 .. n-1 are the census classes (good curves), n is the node with alpha a square,
    n+1 the node with alpha a nonsquare (cusps [-3a^2, 2a^3]), n+2 the point (0, 0).
    """

    q: int
    ids: np.ndarray  # shape (q*q,)
    n_good: int

    @property
    def node_square(self) -> int:
        return self.n_good

    @property
    def node_nonsquare(self) -> int:
        return self.n_good + 1

    @property
    def star(self) -> int:
        return self.n_good + 2

    def lookup(self, A: int, B: int) -> int:
        return int(self.ids[(A % self.q) * self.q + (B % self.q)])


@lru_cache(maxsize=64)
def p46_classes(q: int) -> P46Classes:
    from .ff_curves import get_census

    census = get_census(q)
    ids = -np.ones(q * q, dtype=np.int64)
    u = np.arange(1, q, dtype=np.int64)
    u2 = u * u % q
    u4 = u2 * u2 % q
    u6 = u4 * u2 % q
    for i, r in enumerate(census.classes):
        ids[(u4 * r.A % q) * q + (u6 * r.B % q)] = i
    n = len(census.classes)
    a = u
    sq = np.zeros(q, dtype=bool)
    sq[u2] = True
    A = (-3 * (a * a % q)) % q
    B = (2 * (a * a % q) * a) % q
    ids[A * q + B] = np.where(sq[a], n, n + 1)
    ids[0] = n + 2
    if (ids < 0).any():
        raise InvariantViolation(f"unclassified pairs in P(4,6)(F_{q})")
    return P46Classes(q, ids, n)


def _poly_mod_grid(P, q: int) -> np.ndarray:
    """P(c0, c1) mod q on the full q x q grid, in int64."""
    r = np.arange(q, dtype=np.int64)
    deg = max(max(i, j) for (i, j), _ in P)
    pw = np.ones((deg + 1, q), dtype=np.int64)
    for k in range(1, deg + 1):
        pw[k] = pw[k - 1] * r % q
    out = np.zeros((q, q), dtype=np.int64)
    for (i, j), c in P:
        out = (out + (c % q) * np.outer(pw[i], pw[j]) % q) % q
    return out


@lru_cache(maxsize=256)
def observer_labels(fam: FamilyParametrization, q: int) -> np.ndarray:
    """labels[c0, c1] = class id of (f(c), g(c)) mod q."""
    cls = p46_classes(q)
    A = _poly_mod_grid(fam.f_poly, q)
    B = _poly_mod_grid(fam.g_poly, q)
    return cls.ids[A * q + B].reshape(q, q)


def local_densities(fam: FamilyParametrization, q: int) -> dict[int, Fraction]:
    """q-adic density of each class among q-minimal parameter points."""
    u1 = fam.source[1]
    labels = observer_labels(fam, q)
    w = {}
    unit = Fraction(1, q * q)
    for c0 in range(q):
        for c1 in range(q):
            m = unit
            if c0 == 0 and c1 == 0:
                m = unit - Fraction(1, q ** (1 + u1))  # remove q | x0 and q^u1 | x1
            lab = int(labels[c0, c1])
            w[lab] = w.get(lab, Fraction(0)) + m
    tot = sum(w.values())
    return {k: v / tot for k, v in w.items()}
