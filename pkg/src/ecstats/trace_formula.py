"""Elementary side of the Eichler-Selberg trace formula in the Kaplan-Petrow form.

Hecke traces on S_k(Gamma(n1, lam)), Gamma(n1, lam) = Gamma1(n1) cap Gamma0(n1 lam), are
recovered from finite-field expectations E_q(U_{k-2}(a, q) Phi_A) by inverting the
formula in the case where the sum over nu has a single term.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .arith import (crt_pair, dedekind_psi, divisor_sigma, divisors, euler_phi, factorize,
                    num_divisors, phi_signed)
from .errors import BadInputError, CoprimalityError
from .ff_curves import CurveCensus
from .level_fibers import AbelianRank2, expectation_phi


def chebyshev_U(j: int, a: int, q: int) -> int:
    """U_0 = 1, U_1 = a, U_{j+1} = a U_j - q U_{j-1}."""
    if j < 0:
        raise BadInputError("j must be nonnegative")
    prev, cur = 1, a
    if j == 0:
        return 1
    for _ in range(j - 1):
        prev, cur = cur, a * cur - q * prev
    return cur


def arithmetic_functions(n: int) -> tuple[int, int, int, int]:
    """(Euler phi, Dedekind psi, sigma, signed phi) of n."""
    return euler_phi(n), dedekind_psi(n), divisor_sigma(n), phi_signed(n)


def _prime_power(q: int) -> tuple[int, int]:
    f = factorize(q)
    if len(f) != 1:
        raise BadInputError(f"{q} is not a prime power")
    (p, v), = f.items()
    return p, v


def _delta(c: int, x: int, y: int) -> int:
    return 1 if (x - y) % c == 0 else 0


@dataclass(frozen=True)
class TraceParams:
    n1: int
    lam: int
    k: int
    q: int
    d: int = 1

    def __post_init__(self):
        if self.n1 % self.lam:
            raise BadInputError(f"lambda={self.lam} does not divide n1={self.n1}")
        if self.k < 2:
            raise BadInputError("weight must be at least 2")
        if gcd(self.q, self.n1 * self.lam) != 1:
            raise CoprimalityError(f"q={self.q} is not coprime to {self.n1 * self.lam}")
        if self.d != 1:
            raise BadInputError("only the trivial diamond class d = 1 is supported")


@dataclass(frozen=True)
class GeometricTerms:
    T_id: Fraction
    T_hyp: Fraction
    T_dual: Fraction


def _t_id(n1: int, lam: int, k: int, q: int, dinv: int) -> Fraction:
    p, v = _prime_power(q)
    if v % 2:
        return Fraction(0)  # q^(1/2) is not an integer, both deltas vanish
    r = p ** (v // 2)
    s = _delta(n1, r, dinv) + (-1) ** k * _delta(n1, r, -dinv)
    return Fraction(k - 1, 24) * r ** (k - 2) * dedekind_psi(n1 * lam) * s


def _t_hyp(n1: int, lam: int, k: int, q: int, dinv: int) -> Fraction:
    p, v = _prime_power(q)
    L = n1 * lam
    total = Fraction(0)
    for i in range(v + 1):
        pi, pv = p**i, p ** (v - i)
        inner = Fraction(0)
        for tau in divisors(L):
            g = gcd(tau, L // tau)
            if (pi - pv) % g:
                continue
            y, mod = crt_pair(pi % tau, tau, pv % (L // tau), L // tau)
            c = Fraction(n1 * gcd(lam, g), g)
            assert c.denominator == 1 and (L // g) % c.numerator == 0
            c = c.numerator
            s = _delta(c, y, dinv) + (-1) ** k * _delta(c, y, -dinv)
            inner += Fraction(euler_phi(g) * euler_phi(c), euler_phi(n1)) * s
        total += min(pi, pv) ** (k - 1) * inner
    return total / 4


def geometric_terms(params: TraceParams) -> GeometricTerms:
    n1, lam, k, q = params.n1, params.lam, params.k, params.q
    dinv = 1
    t_dual = Fraction(divisor_sigma(q), euler_phi(n1)) if k == 2 else Fraction(0)
    return GeometricTerms(_t_id(n1, lam, k, q, dinv), _t_hyp(n1, lam, k, q, dinv), t_dual)


def _normalizer(n1: int, lam: int) -> Fraction:
    return Fraction(dedekind_psi(n1 * n1 // (lam * lam)) * euler_phi(n1 // lam), dedekind_psi(n1 * n1))


def T_value(params: TraceParams, trace: Fraction) -> Fraction:
    """T_{n1,lam}(q, 1) for a given Hecke trace."""
    g = geometric_terms(params)
    t_trace = Fraction(trace) / euler_phi(params.n1)
    return _normalizer(params.n1, params.lam) * (-t_trace + g.T_id - g.T_hyp + g.T_dual)


def deligne_bound_sq(n1: int, lam: int, k: int, q: int) -> Fraction:
    """Square of (k-1)/12 phi(n1) psi(n1 lam) d(q) q^((k-1)/2)."""
    c = Fraction(k - 1, 12) * euler_phi(n1) * dedekind_psi(n1 * lam) * num_divisors(q)
    return c * c * q ** (k - 1)


@dataclass(frozen=True)
class TraceReport:
    params: TraceParams
    group: tuple[int, int]
    expectation: Fraction
    terms: GeometricTerms
    solved_trace: Fraction
    integer_verdict: bool
    deligne_verdict: bool

    def row(self) -> dict:
        return {"n1": self.group[0], "n2": self.group[1], "k": self.params.k, "q": self.params.q,
                "expectation_num": self.expectation.numerator, "expectation_den": self.expectation.denominator,
                "trace_num": self.solved_trace.numerator, "trace_den": self.solved_trace.denominator,
                "integer_ok": self.integer_verdict, "deligne_ok": self.deligne_verdict}


def expectation_U(A, census: CurveCensus, k: int) -> Fraction:
    q = census.p
    return expectation_phi(A, census, lambda a: chebyshev_U(k - 2, a, q))


def solve_trace(k: int, census: CurveCensus, A) -> TraceReport:
    """Recover Tr(T_q | S_k(Gamma(n1, n2))) from E_q(U_{k-2} Phi_A), A = (n1, n2).

    Only the single-term case gcd(q-1, n1) = n2 is accepted.  The correction
    p^{k-1} T(q/p^2, p) vanishes for prime q.
    """
    A = A if isinstance(A, AbelianRank2) else AbelianRank2(*A)
    n1, n2 = A.m1, A.m2
    q = census.p
    if gcd(q - 1, n1) != n2:
        raise BadInputError(
            f"gcd(q-1, n1) = {gcd(q - 1, n1)} differs from n2 = {n2}: the nu-sum has several terms")
    params = TraceParams(n1, n2, k, q)
    expectation = expectation_U(A, census, k)
    terms = geometric_terms(params)
    T = q * euler_phi(n1 // n2) * expectation
    t_trace = terms.T_id - terms.T_hyp + terms.T_dual - T / _normalizer(n1, n2)
    trace = euler_phi(n1) * t_trace
    return TraceReport(params, (n1, n2), expectation, terms, trace,
                       trace.denominator == 1,
                       trace * trace <= deligne_bound_sq(n1, n2, k, q))


def b_constant(n1: int, n2: int, nu: int) -> Fraction:
    if n1 % n2 or (n1 // n2) % nu:
        raise BadInputError(f"need nu | n1/n2, got n1={n1}, n2={n2}, nu={nu}")
    lam = n2 * nu
    return -Fraction(phi_signed(nu) * dedekind_psi(n1 * n1 // (lam * lam)) * euler_phi(n1 // lam),
                     dedekind_psi(n1 * n1) * euler_phi(n1 // n2) * euler_phi(n1))


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    fields = ["n1", "n2", "k", "q", "expectation_num", "expectation_den", "trace_num", "trace_den",
              "integer_ok", "deligne_ok"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()
