"""Congruence subgroups Gamma1(M, N) = Gamma(M) cap Gamma1(MN)."""
from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd

from .errors import BadInputError, CoprimalityError


@dataclass(frozen=True, order=True)
class LevelSpec:
    M: int
    N: int

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise BadInputError(f"level parameters must be positive, got M={self.M}, N={self.N}")

    @property
    def level(self) -> int:
        return self.M * self.N

    @property
    def torsion_group(self) -> tuple[int, int]:
        return (self.M * self.N, self.M)

    @property
    def representable(self) -> bool:
        return self.M * self.N >= 5 or self.M >= 3

    @property
    def token(self) -> str:
        if self.M == 1:
            return f"G1-{self.N}"
        if self.N == 1:
            return f"G-{self.M}"
        return f"G1-{self.M}-{self.N}"

    def __str__(self) -> str:
        return self.token

    def require_coprime(self, q: int, extra: int = 1) -> None:
        if gcd(q, self.level * extra) != 1:
            raise CoprimalityError(f"q={q} is not coprime to {self.level * extra} (level {self.token})")


def gamma1(n: int) -> LevelSpec:
    return LevelSpec(1, n)


def full_gamma(m: int) -> LevelSpec:
    return LevelSpec(m, 1)


_TOKEN = re.compile(r"^G(1?)-(\d+)(?:-(\d+))?$")


def parse_level(token: str) -> LevelSpec:
    """Parse G1-<N>, G-<N> or G1-<M>-<N>."""
    m = _TOKEN.match(token.strip())
    if not m:
        raise BadInputError(f"cannot parse level token {token!r}; use G1-<N>, G-<N> or G1-<M>-<N>")
    one, a, b = m.groups()
    if b is not None:
        if not one:
            raise BadInputError(f"level token {token!r}: the two-parameter form is G1-<M>-<N>")
        return LevelSpec(int(a), int(b))
    return LevelSpec(1, int(a)) if one else LevelSpec(int(a), 1)
