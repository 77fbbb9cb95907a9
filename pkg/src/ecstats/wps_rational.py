"""Points of weighted projective space P(w)(Q): content, normalization, heights, reduction.

A point is an integer vector x up to x ~ lambda * x = (lambda^{w_j} x_j).  The content
I_w(x) = prod_p p^{min_j floor(ord_p(x_j) / w_j)}; minimal representatives have content 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd, lcm, prod
from typing import Iterator, Sequence

from .arith import factorize, valuation
from .errors import BadInputError, ResourceLimitError

STAR = "*"
ENUMERATION_CEILING = 10**7


@dataclass(frozen=True)
class WeightVector:
    entries: tuple[int, ...]

    def __post_init__(self):
        ent = tuple(int(w) for w in self.entries)
        if not ent or any(w < 1 for w in ent):
            raise BadInputError(f"weights must be positive integers, got {self.entries}")
        object.__setattr__(self, "entries", ent)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def lcm(self) -> int:
        return reduce(lcm, self.entries)


def _weights(w) -> WeightVector:
    return w if isinstance(w, WeightVector) else WeightVector(tuple(w))


def _check_nonzero(x: Sequence[int]) -> None:
    if all(v == 0 for v in x):
        raise BadInputError("the zero vector is not a point of weighted projective space")


def _content_int(w: WeightVector, x: Sequence[int]) -> int:
    nz = [(wj, abs(xj)) for wj, xj in zip(w, x) if xj]
    if len(nz) == 1:
        wj, v = nz[0]
        return prod(p ** (e // wj) for p, e in factorize(v).items())
    g = reduce(gcd, (v for _, v in nz))
    c = 1
    for p in factorize(g):
        c *= p ** min(valuation(v, p) // wj for wj, v in nz)
    return c


def content_ideal(w, x: Sequence[int]) -> Fraction:
    """I_w(x) for an integer vector, as a positive rational."""
    w = _weights(w)
    _check_nonzero(x)
    return Fraction(_content_int(w, x))


def scale(w, lam: int, x: Sequence[int]) -> tuple[int, ...]:
    return tuple(lam**wj * xj for wj, xj in zip(_weights(w), x))


def _canonical_sign(w: WeightVector, x: tuple[int, ...]) -> tuple[int, ...]:
    # lambda = -1 multiplies odd-weight coordinates by -1 and fixes the rest
    for wj, xj in zip(w, x):
        if wj % 2 and xj:
            if xj < 0:
                return tuple(-v if wk % 2 else v for wk, v in zip(w, x))
            return x
    return x


@dataclass(frozen=True)
class WpsPoint:
    weights: WeightVector
    coords: tuple[int, ...]

    @property
    def height_power(self) -> int:
        """max_j |x_j|^(L / w_j) with L = lcm(w); the height is its L-th root."""
        L = self.weights.lcm
        return max(abs(x) ** (L // w) for w, x in zip(self.weights, self.coords))

    @property
    def height(self) -> float:
        return max(abs(x) ** (1.0 / w) for w, x in zip(self.weights, self.coords))

    @property
    def height_argmax(self) -> tuple[int, int]:
        """(j*, |x_j*|) realising the height, for exact comparisons."""
        L = self.weights.lcm
        j = max(range(len(self.coords)), key=lambda i: abs(self.coords[i]) ** (L // self.weights[i]))
        return j, abs(self.coords[j])

    def height_at_most(self, B) -> bool:
        """Exact test height <= B for rational B."""
        B = Fraction(B)
        L = self.weights.lcm
        return self.height_power * B.denominator**L <= B.numerator**L


def normalize(w, x: Sequence[int]) -> WpsPoint:
    w = _weights(w)
    x = tuple(int(v) for v in x)
    if len(x) != len(w):
        raise BadInputError("coordinate count does not match the weights")
    _check_nonzero(x)
    c = _content_int(w, x)
    if c > 1:
        x = tuple(v // c**wj for wj, v in zip(w, x))
    return WpsPoint(w, _canonical_sign(w, x))


@dataclass(frozen=True)
class ReducedPoint:
    q: int
    value: tuple[int, ...] | str

    @property
    def is_star(self) -> bool:
        return self.value == STAR


def canonical_mod(w, x: Sequence[int], q: int) -> tuple[int, ...]:
    """Lexicographically least representative of the F_q^x-orbit of x in P(w)(F_q)."""
    w = _weights(w)
    best = None
    for u in range(1, q):
        y = tuple(pow(u, wj, q) * xj % q for wj, xj in zip(w, x))
        if best is None or y < best:
            best = y
    return best


def reduce_mod_p(point: WpsPoint, q: int) -> ReducedPoint:
    w = point.weights
    x = point.coords
    nz = [(wj, xj) for wj, xj in zip(w, x) if xj]
    k = min(valuation(xj, q) // wj for wj, xj in nz)
    if k:
        x = tuple(v // q ** (k * wj) for wj, v in zip(w, x))
    red = tuple(v % q for v in x)
    if all(v == 0 for v in red):
        return ReducedPoint(q, STAR)
    return ReducedPoint(q, canonical_mod(w, red, q))


def enumerate_points(w, B, ceiling: int = ENUMERATION_CEILING) -> Iterator[WpsPoint]:
    """Every normalized point of height <= B, once each, by a box scan."""
    w = _weights(w)
    B = Fraction(B)
    if B <= 0:
        return
    L = w.lcm
    # |x_j| <= B^{w_j}
    bounds = [B.numerator**wj // B.denominator**wj for wj in w]
    size = prod(2 * b + 1 for b in bounds)
    if size > ceiling:
        raise ResourceLimitError(f"box of {size} vectors exceeds the ceiling {ceiling}")
    BL = (B.numerator**L, B.denominator**L)
    for x in product(*(range(-b, b + 1) for b in bounds)):
        if not any(x):
            continue
        if _content_int(w, x) != 1 or _canonical_sign(w, x) != x:
            continue
        pt = WpsPoint(w, x)
        if pt.height_power * BL[1] <= BL[0]:
            yield pt


# ---------------------------------------------------------------- morphisms

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class WpsMorphism:
    """x -> (f_0(x), ..., f_n(x)) from P(u) to P(w); f_j weighted homogeneous of degree e*w_j.

    Each f_j is a tuple of (exponent vector, integer coefficient) pairs.
    """

    source: WeightVector
    target: WeightVector
    polys: tuple[tuple[tuple[Monomial, int], ...], ...]
    e: int

    def __post_init__(self):
        object.__setattr__(self, "source", _weights(self.source))
        object.__setattr__(self, "target", _weights(self.target))
        if len(self.polys) != len(self.target):
            raise BadInputError("one polynomial per target coordinate is required")
        for f, wj in zip(self.polys, self.target):
            for mono, c in f:
                if sum(a * u for a, u in zip(mono, self.source)) != self.e * wj:
                    raise BadInputError(f"monomial {mono} is not of weighted degree {self.e * wj}")

    def __call__(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(c * prod(xi**a for xi, a in zip(x, mono)) for mono, c in f) for f in self.polys)


def defect(f: WpsMorphism, point: WpsPoint | Sequence[int]) -> Fraction:
    """delta_f(x) = I_w(f(x)) * I_u(x)^(-e)."""
    x = point.coords if isinstance(point, WpsPoint) else tuple(point)
    _check_nonzero(x)
    y = f(x)
    if all(v == 0 for v in y):
        raise BadInputError(f"{x} lies in the base locus of the morphism")
    return Fraction(_content_int(f.target, y), _content_int(f.source, x) ** f.e)
