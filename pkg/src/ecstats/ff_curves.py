"""Elliptic curves over prime fields F_p (p >= 5) and exhaustive isomorphism-class censuses.

A curve is y^2 = x^3 + A x + B.  Two pairs are isomorphic over F_p exactly when
(A', B') = (u^4 A, u^6 B) for some unit u, and a census lists one record per class
with its trace, group structure and automorphism count.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from pathlib import Path
from typing import Iterable

import numpy as np

from .arith import factorize, is_prime, valuation
from .errors import BadInputError, InvariantViolation, MissingCacheError, ResourceLimitError

CENSUS_PRIME_CEILING = 5003


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise BadInputError(f"{self.p} is not prime")
        if self.p < 5:
            raise BadInputError(f"characteristic {self.p} < 5 is not supported")
        object.__setattr__(self, "p", int(self.p))


@dataclass(frozen=True)
class ShortWeierstrassCurve:
    field: PrimeField
    A: int
    B: int

    def __post_init__(self):
        p = self.field.p
        object.__setattr__(self, "A", int(self.A) % p)
        object.__setattr__(self, "B", int(self.B) % p)
        if (4 * self.A**3 + 27 * self.B**2) % p == 0:
            raise BadInputError(f"singular curve A={self.A}, B={self.B} over F_{p}")

    @property
    def p(self) -> int:
        return self.field.p


@dataclass(frozen=True)
class IsoClassRecord:
    representative: ShortWeierstrassCurve
    trace_a: int
    group: tuple[int, int]
    aut_count: int
    orbit_size: int

    @property
    def A(self) -> int:
        return self.representative.A

    @property
    def B(self) -> int:
        return self.representative.B

    @property
    def p(self) -> int:
        return self.representative.p


@dataclass(frozen=True)
class CurveCensus:
    field: PrimeField
    classes: tuple[IsoClassRecord, ...] = field(repr=False)

    @property
    def p(self) -> int:
        return self.field.p

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def check(self) -> None:
        """Raise InvariantViolation unless the census invariants hold exactly."""
        p = self.p
        if sum(r.orbit_size for r in self.classes) != p * p - p:
            raise InvariantViolation(f"orbit sizes do not sum to p^2-p at p={p}")
        if sum(Fraction(1, r.aut_count) for r in self.classes) != p:
            raise InvariantViolation(f"mass formula fails at p={p}")
        for r in self.classes:
            n1, n2 = r.group
            if n1 * n2 != p + 1 - r.trace_a or n1 % n2 or (p - 1) % n2:
                raise InvariantViolation(f"bad group record {r}")
            if r.trace_a * r.trace_a > 4 * p:
                raise InvariantViolation(f"Hasse bound violated by {r}")


# ---------------------------------------------------------------- tables

@lru_cache(maxsize=64)
def _chi_table(p: int) -> np.ndarray:
    """Quadratic character as an int8 lookup table indexed by residues."""
    chi = -np.ones(p, dtype=np.int8)
    sq = (np.arange(1, p, dtype=np.int64) ** 2) % p
    chi[sq] = 1
    chi[0] = 0
    return chi


@lru_cache(maxsize=64)
def _sqrt_table(p: int) -> np.ndarray:
    """root[r] = some y with y^2 = r mod p, or -1 if r is a nonresidue."""
    root = -np.ones(p, dtype=np.int64)
    ys = np.arange((p + 1) // 2, dtype=np.int64)
    root[(ys * ys) % p] = ys
    return root


def legendre(a: int, p: int) -> int:
    return int(_chi_table(p)[a % p])


# ---------------------------------------------------------------- single curves

def point_count(curve: ShortWeierstrassCurve) -> int:
    p = curve.p
    x = np.arange(p, dtype=np.int64)
    v = (x * x % p * x + curve.A * x + curve.B) % p
    return p + 1 + int(_chi_table(p)[v].sum(dtype=np.int64))


def trace_of_frobenius(curve: ShortWeierstrassCurve) -> int:
    return curve.p + 1 - point_count(curve)


def automorphism_count(curve: ShortWeierstrassCurve) -> int:
    p = curve.p
    u = np.arange(1, p, dtype=np.int64)
    u2 = u * u % p
    u4 = u2 * u2 % p
    u6 = u4 * u2 % p
    ok = ((u4 * curve.A - curve.A) % p == 0) & ((u6 * curve.B - curve.B) % p == 0)
    return int(ok.sum())


def _aut_formula(p: int, A: int, B: int) -> int:
    if A == 0:
        return gcd(6, p - 1)
    if B == 0:
        return gcd(4, p - 1)
    return 2


def rational_points(curve: ShortWeierstrassCurve) -> list[tuple[int, int] | None]:
    """All points of E(F_p); None stands for the point at infinity."""
    xs, ys = _affine_points(curve.p, np.array([curve.A]), np.array([curve.B]))[1:]
    return [None] + list(zip(xs.tolist(), ys.tolist()))


def _affine_points(p: int, As: np.ndarray, Bs: np.ndarray):
    """Affine points of many curves at once: (curve_index, x, y) arrays."""
    x = np.arange(p, dtype=np.int64)
    v = (x * x % p * x)[None, :] + As[:, None] * x[None, :] + Bs[:, None]
    v %= p
    root = _sqrt_table(p)[v]
    ci, xi = np.nonzero(root >= 0)
    r = root[ci, xi]
    nz = r != 0
    cis = np.concatenate([ci, ci[nz]])
    xs = np.concatenate([xi, xi[nz]]).astype(np.int64)
    ys = np.concatenate([r, (p - r[nz]) % p])
    order = np.lexsort((ys, xs, cis))
    return cis[order], xs[order], ys[order]


# ---------------------------------------------------------------- vectorized group law

def _inv_mod(a: np.ndarray, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def _ec_add(x1, y1, o1, x2, y2, o2, a, p):
    """Affine addition on arrays of points; o* flags the point at infinity."""
    same_x = (x1 == x2) & ~o1 & ~o2
    cancel = same_x & ((y1 + y2) % p == 0)
    dbl = same_x & ~cancel
    num = np.where(dbl, (3 * x1 * x1 + a) % p, (y2 - y1) % p)
    den = np.where(dbl, 2 * y1 % p, (x2 - x1) % p)
    den = np.where(den == 0, 1, den)
    lam = num * _inv_mod(den, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    o3 = cancel.copy()
    x3 = np.where(o1, x2, np.where(o2, x1, x3))
    y3 = np.where(o1, y2, np.where(o2, y1, y3))
    o3 = np.where(o1, o2, np.where(o2, o1, o3))
    return x3, y3, o3


def _ec_mul(x, y, o, m: int, a, p):
    rx, ry, ro = x.copy(), y.copy(), np.ones_like(o)
    bx, by, bo = x, y, o
    while m:
        if m & 1:
            rx, ry, ro = _ec_add(rx, ry, ro, bx, by, bo, a, p)
        m >>= 1
        if m:
            bx, by, bo = _ec_add(bx, by, bo, bx, by, bo, a, p)
    return rx, ry, ro


def _n2_batch(p: int, As: np.ndarray, Bs: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Second invariant factor n2 for many curves with known point counts."""
    n2 = np.ones(len(As), dtype=np.int64)
    ells = sorted({l for l in factorize(p - 1)})
    for ell in ells:
        # curves whose ell-part could be non-cyclic: ell^2 | N
        need = np.flatnonzero(counts % (ell * ell) == 0)
        if need.size == 0:
            continue
        cap = np.array([min(valuation(int(counts[i]), ell) // 2, valuation(p - 1, ell)) for i in need])
        ci, xs, ys = _affine_points(p, As[need], Bs[need])
        a = As[need][ci]
        os_ = np.zeros(len(xs), dtype=bool)
        # number of points (with O) killed by ell^k, per curve
        prev = np.ones(len(need), dtype=np.int64)
        alive = np.ones(len(need), dtype=bool)
        k = 0
        while alive.any():
            k += 1
            xs, ys, os_ = _ec_mul(xs, ys, os_, ell, a, p)
            killed = np.bincount(ci, weights=os_, minlength=len(need)).astype(np.int64) + 1
            grew_full = killed == prev * ell * ell
            step_ok = alive & grew_full & (k <= cap)
            n2[need[step_ok]] *= ell
            alive = step_ok
            prev = killed
            keep = alive[ci]
            ci, xs, ys, os_, a = ci[keep], xs[keep], ys[keep], os_[keep], a[keep]
    return n2


def group_structure(curve: ShortWeierstrassCurve) -> tuple[int, int]:
    N = point_count(curve)
    n2 = int(_n2_batch(curve.p, np.array([curve.A]), np.array([curve.B]), np.array([N]))[0])
    return N // n2, n2


# ---------------------------------------------------------------- census

def class_representatives(p: int) -> list[tuple[int, int]]:
    """Lexicographically least (A, B) of every isomorphism class, in lex order.

    For A != 0 the orbit meets the row of A0 = min(A * fourth powers); inside that
    row the remaining freedom is B -> zeta^6 B with zeta^4 = 1, i.e. B -> -B when
    p = 1 mod 4.  For A = 0 the class is B times sixth powers.
    """
    reps: list[tuple[int, int]] = []
    units = np.arange(1, p, dtype=np.int64)
    sq = units * units % p
    fourth = np.unique(sq * sq % p)
    sixth = np.unique(sq * sq % p * sq % p)
    a_reps = sorted({int(np.min(a * fourth % p)) for a in range(1, p)})
    b_reps = sorted({int(np.min(b * sixth % p)) for b in range(1, p)})
    reps += [(0, b) for b in b_reps]
    sign_free = p % 4 == 1
    for a in a_reps:
        for b in range(p):
            if (4 * a**3 + 27 * b * b) % p == 0:
                continue
            if sign_free and b > (p - b) % p:
                continue
            reps.append((a, b))
    reps.sort()
    return reps


def build_census(fld: PrimeField | int, max_prime: int = CENSUS_PRIME_CEILING) -> CurveCensus:
    if not isinstance(fld, PrimeField):
        fld = PrimeField(int(fld))
    p = fld.p
    if p > max_prime:
        raise ResourceLimitError(f"census prime {p} exceeds the ceiling {max_prime}")
    reps = class_representatives(p)
    As = np.array([r[0] for r in reps], dtype=np.int64)
    Bs = np.array([r[1] for r in reps], dtype=np.int64)
    x = np.arange(p, dtype=np.int64)
    chi = _chi_table(p)
    counts = np.empty(len(reps), dtype=np.int64)
    step = max(1, 4_000_000 // p)
    for lo in range(0, len(reps), step):
        v = ((x * x % p * x)[None, :] + As[lo:lo + step, None] * x[None, :] + Bs[lo:lo + step, None]) % p
        counts[lo:lo + step] = p + 1 + chi[v].sum(axis=1, dtype=np.int64)
    n2 = _n2_batch(p, As, Bs, counts)
    records = []
    for (A, B), N, m2 in zip(reps, counts.tolist(), n2.tolist()):
        aut = _aut_formula(p, A, B)
        records.append(IsoClassRecord(
            representative=ShortWeierstrassCurve(fld, A, B),
            trace_a=p + 1 - N,
            group=(N // m2, m2),
            aut_count=aut,
            orbit_size=(p - 1) // aut,
        ))
    census = CurveCensus(fld, tuple(records))
    census.check()
    return census


# ---------------------------------------------------------------- cache

def census_path(cache_dir: str | os.PathLike, p: int) -> Path:
    return Path(cache_dir) / f"census_p{p}.jsonl"


def save_census(census: CurveCensus, cache_dir: str | os.PathLike) -> Path:
    path = census_path(cache_dir, census.p)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        for r in census.classes:
            fh.write(json.dumps({"p": census.p, "A": r.A, "B": r.B, "a": r.trace_a,
                                 "n1": r.group[0], "n2": r.group[1], "aut": r.aut_count}) + "\n")
    os.replace(tmp, path)
    return path


def load_census(cache_dir: str | os.PathLike, p: int) -> CurveCensus:
    path = census_path(cache_dir, p)
    if not path.exists():
        raise MissingCacheError(f"no census cache for p={p} at {path}")
    fld = PrimeField(p)
    records = []
    with open(path) as fh:
        for line in fh:
            d = json.loads(line)
            if d["p"] != p:
                raise InvariantViolation(f"{path} holds a record for p={d['p']}")
            records.append(IsoClassRecord(ShortWeierstrassCurve(fld, d["A"], d["B"]), d["a"],
                                          (d["n1"], d["n2"]), d["aut"], (p - 1) // d["aut"]))
    census = CurveCensus(fld, tuple(records))
    census.check()
    return census


_default_cache_dir: Path | None = None


def set_default_cache_dir(path: str | os.PathLike | None) -> None:
    """Cache directory used by get_census when none is passed explicitly."""
    global _default_cache_dir
    _default_cache_dir = Path(path) if path is not None else None
    _census_memo.cache_clear()


@lru_cache(maxsize=256)
def _census_memo(p: int) -> CurveCensus:
    if _default_cache_dir is not None:
        return _cached_census(p, _default_cache_dir)
    return build_census(p)


def _cached_census(p: int, cache_dir) -> CurveCensus:
    try:
        return load_census(cache_dir, p)
    except (MissingCacheError, InvariantViolation, json.JSONDecodeError, KeyError):
        census = build_census(p)
        save_census(census, cache_dir)
        return census


def get_census(p: int, cache_dir: str | os.PathLike | None = None) -> CurveCensus:
    """Census for p, read from (or written to) cache_dir when one is given."""
    if cache_dir is None:
        return _census_memo(p)
    return _cached_census(p, cache_dir)


def censuses(primes: Iterable[int], cache_dir=None) -> dict[int, CurveCensus]:
    return {p: get_census(p, cache_dir) for p in primes}
