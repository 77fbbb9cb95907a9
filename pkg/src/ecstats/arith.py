"""Small integer helpers: primality, factorization, multiplicative functions, sieves."""
from __future__ import annotations

from functools import lru_cache
from math import gcd, prod

import numpy as np
from sympy import factorint as _factorint
from sympy import isprime as _isprime


def is_prime(n: int) -> bool:
    return n >= 2 and bool(_isprime(n))


@lru_cache(maxsize=4096)
def _factor_cached(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(_factorint(n).items()))


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| as {p: e}; empty for |n| <= 1."""
    n = abs(int(n))
    if n <= 1:
        return {}
    if n < 1 << 40:
        return dict(_factor_cached(n))
    return dict(sorted(_factorint(n).items()))


def prime_divisors(n: int) -> list[int]:
    return list(factorize(n))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def euler_phi(n: int) -> int:
    r = n
    for p in factorize(n):
        r = r // p * (p - 1)
    return r


def dedekind_psi(n: int) -> int:
    r = n
    for p in factorize(n):
        r = r // p * (p + 1)
    return r


def divisor_sigma(n: int) -> int:
    return prod((p ** (e + 1) - 1) // (p - 1) for p, e in factorize(n).items())


def num_divisors(n: int) -> int:
    return prod(e + 1 for e in factorize(n).values())


def phi_signed(n: int) -> int:
    """n * prod_{p | n} (-phi(p)), the signed variant used in the trace formula."""
    return n * prod(-(p - 1) for p in factorize(n))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def squarefree_divisors_with_mobius(primes) -> list[tuple[int, int]]:
    """All (d, mu(d)) for squarefree d built from the given distinct primes."""
    out = [(1, 1)]
    for p in primes:
        out += [(d * p, -m) for d, m in out]
    return out


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """Solve x = r1 (m1), x = r2 (m2). Returns (r, lcm) or None if inconsistent."""
    g = gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    l = m1 // g * m2
    if m1 == 1:
        return r2 % l, l
    k = ((r2 - r1) // g * pow(m1 // g, -1, m2 // g)) % (m2 // g) if m2 // g > 1 else 0
    return (r1 + m1 * k) % l, l


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, exact."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2:
        return n
    x = int(round(n ** (1.0 / k))) if n < 1 << 1000 else 1 << (n.bit_length() // k + 1)
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def isqrt_floor_2sqrt(p: int) -> int:
    """Largest integer a with a^2 <= 4p (the Hasse range bound)."""
    return iroot(4 * p, 2)


@lru_cache(maxsize=8)
def prime_sieve(limit: int) -> np.ndarray:
    """Sorted array of all primes <= limit."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for i in range(3, int(limit**0.5) + 1, 2):
        if flags[i]:
            flags[i * i :: 2 * i] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_in_range(lo: int, hi: int) -> list[int]:
    ps = prime_sieve(max(hi, 2))
    return [int(p) for p in ps if lo <= p <= hi]
