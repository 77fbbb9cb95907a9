"""Shared brute-force oracles.  Nothing here imports the package's fast paths."""
from __future__ import annotations

import math
from fractions import Fraction

from sympy import factorint


def naive_points(p: int, A: int, B: int) -> list:
    pts = [None]
    for x in range(p):
        r = (x * x * x + A * x + B) % p
        for y in range(p):
            if y * y % p == r:
                pts.append((x, y))
    return pts


def _add(P, Q, A, p):
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def naive_group(p: int, A: int, B: int) -> tuple[int, int]:
    """Invariant factors (n1, n2) from element orders: n1 is the exponent."""
    pts = naive_points(p, A, B)
    exponent = 1
    for P in pts:
        k, Q = 1, P
        while Q is not None:
            Q = _add(Q, P, A, p)
            k += 1
        exponent = math.lcm(exponent, k if P is not None else 1)
    return exponent, len(pts) // exponent


def naive_injections(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Injective homs Z/a1 x Z/a2 -> Z/b1 x Z/b2 by listing every element of the source."""
    (a1, a2), (b1, b2) = a, b
    tgt = [(u, v) for u in range(b1) for v in range(b2)]

    def mul(k, x):
        return (k * x[0] % b1, k * x[1] % b2)

    n = 0
    for g in tgt:
        if mul(a1, g) != (0, 0):
            continue
        for h in tgt:
            if mul(a2, h) != (0, 0):
                continue
            images = {((i * g[0] + j * h[0]) % b1, (i * g[1] + j * h[1]) % b2)
                      for i in range(a1) for j in range(a2)}
            n += len(images) == a1 * a2
    return n


def primes_between(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 2), hi + 1) if all(n % d for d in range(2, math.isqrt(n) + 1))]


def brute_family(fam, X, box1: int, rows: int):
    """Parameter points of height <= X by a plain box scan, with their minimal (A, B)."""
    u1 = fam.source[1]
    out = []
    for x0 in range(rows + 1):
        for x1 in range(-box1, box1 + 1):
            if (x0, x1) == (0, 0):
                continue
            # content and sign in P(1, u1)
            g = math.gcd(x0, x1) if u1 == 1 else _content_1u(x0, x1, u1)
            if g != 1:
                continue
            if x0 == 0 and u1 % 2 == 1 and x1 < 0:
                continue
            f, gg = fam.curve(x0, x1)
            if 4 * f**3 + 27 * gg * gg == 0:
                continue
            A, B = _minimal46(f, gg)
            if max(abs(A) ** 3, B * B) * Fraction(X).denominator ** 12 <= Fraction(X).numerator ** 12:
                out.append(((x0, x1), (A, B)))
    return out


def _content_1u(x0: int, x1: int, u1: int) -> int:
    c = 1
    for p in factorint(math.gcd(x0, x1)):
        k = 0
        while x0 % p ** (k + 1) == 0 and x1 % p ** (u1 * (k + 1)) == 0:
            k += 1
        c *= p**k
    return c


def _minimal46(A: int, B: int) -> tuple[int, int]:
    for p in factorint(math.gcd(A, B)):
        while A % p**4 == 0 and B % p**6 == 0:
            A //= p**4
            B //= p**6
    return A, B


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
