"""Explicit-formula sums over Q for a Fejer test function, and the average-rank bound."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .arith import prime_sieve
from .errors import BadInputError, ResourceLimitError

SIEVE_CEILING = 10**8


@dataclass(frozen=True)
class TestFunction:
    """phi(x) = sin^2(pi sigma x) / (2 pi x)^2 with Fourier transform (sigma - |u|) / 4 on [-sigma, sigma]."""

    __test__ = False  # not a pytest class
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise BadInputError("sigma must be positive")

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            v = np.sin(np.pi * self.sigma * x) ** 2 / (2 * np.pi * x) ** 2
        v = np.where(x == 0, self.sigma**2 / 4, v)
        return v if v.ndim else float(v)

    def phi_hat(self, u):
        u = np.asarray(u, dtype=float)
        v = np.where(np.abs(u) < self.sigma, (self.sigma - np.abs(u)) / 4, 0.0)
        return v if v.ndim else float(v)

    @property
    def phi0(self) -> float:
        return self.sigma**2 / 4

    @property
    def phi_hat0(self) -> float:
        return self.sigma / 4

    def inverse_transform(self, x: float) -> float:
        """int phi_hat(u) e^(2 pi i u x) du by quadrature, for the Fourier-pair check."""
        from scipy.integrate import quad

        val, _ = quad(lambda u: self.phi_hat(u) * math.cos(2 * math.pi * u * x), -self.sigma, self.sigma,
                      limit=200, epsabs=1e-13, epsrel=1e-12)
        return val


def phi(x, sigma: float):
    return TestFunction(sigma).phi(x)


def phi_hat(u, sigma: float):
    return TestFunction(sigma).phi_hat(u)


def _primes_upto(t: float, ceiling: int = SIEVE_CEILING) -> np.ndarray:
    t = int(math.floor(t))
    if t > ceiling:
        raise ResourceLimitError(f"sieve limit {t} exceeds the ceiling {ceiling}")
    return _cached_primes(t)


@lru_cache(maxsize=8)
def _cached_primes(t: int) -> np.ndarray:
    return prime_sieve(t)


def chebyshev_theta(t: float, ceiling: int = SIEVE_CEILING) -> float:
    """theta(t) = sum of log p over primes p <= t."""
    ps = _primes_upto(t, ceiling)
    return float(np.log(ps.astype(float)).sum()) if ps.size else 0.0


def s2_analytic_sum(X: float, sigma: float, ceiling: int = SIEVE_CEILING) -> float:
    """(2 / log X) sum_p (log p / p) phi_hat(2 log p / log X); tends to phi(0) / 2."""
    if X <= 1:
        raise BadInputError("X must exceed 1")
    tf = TestFunction(sigma)
    L = math.log(X)
    ps = _primes_upto(math.exp(sigma * L / 2), ceiling).astype(float)
    if ps.size == 0:
        return 0.0
    lp = np.log(ps)
    return float(2 / L * np.sum(lp / ps * tf.phi_hat(2 * lp / L)))


# ---------------------------------------------------------------- family sums


@dataclass(frozen=True)
class PrimeTally:
    """Per-prime data the explicit formula consumes: family size and sums of a-hat."""

    p: int
    count: int
    sum_a1: float  # sum over the family of a-hat(p)
    sum_a2: float  # sum of a-hat(p^2)


def tally_from_stats(stats) -> PrimeTally:
    """PrimeTally from a torsion_families.LocalStatistics."""
    p = stats.q
    s1 = 0.0
    s2 = 0.0
    for a, n in stats.by_trace().items():
        s1 += n * a / math.sqrt(p)
        s2 += n * (a * a / p - 2)
    mult = stats.split - stats.nonsplit
    s1 += mult / math.sqrt(p)
    s2 += (stats.split + stats.nonsplit) / p
    return PrimeTally(p, stats.total, s1, s2)


@dataclass
class ExplicitFormulaReport:
    X: float
    sigma: float
    S1: float
    S2: float
    S2_pred: float
    rank_bound: float
    family_size: int
    primes: int
    budget_terms: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"X": self.X, "sigma": self.sigma, "S1": self.S1, "S2": self.S2,
                           "S2_pred": self.S2_pred, "rank_bound": self.rank_bound,
                           "family_size": self.family_size, "primes": self.primes,
                           "budget_terms": self.budget_terms}, sort_keys=True)


def higher_power_budget(X: float, sigma: float) -> float:
    """Bound for the k >= 3 prime-power terms, using |a-hat(p^k)| <= 2."""
    tf = TestFunction(sigma)
    L = math.log(X)
    top = math.exp(sigma * L / 3)
    total = 0.0
    for p in _primes_upto(top).tolist():
        lp = math.log(p)
        k = 3
        while k * lp / L < sigma:
            total += 2 * lp / p ** (k / 2) * tf.phi_hat(k * lp / L)
            k += 1
    return 2 / L * total


def digamma_integral(X: float, sigma: float) -> float:
    """(2 / pi) int phi(r log X / (2 pi)) Re psi(1/2 + i r) dr, the archimedean term."""
    from scipy.integrate import quad
    from scipy.special import psi

    tf = TestFunction(sigma)
    L = math.log(X)

    def f(r):
        return tf.phi(r * L / (2 * math.pi)) * psi(0.5 + 1j * r).real

    # the integrand is even in r; split at the zeros of phi to help quadrature
    step = 2 * math.pi / (sigma * L)
    total = 0.0
    a = 0.0
    for _ in range(400):
        b = a + step
        v, _ = quad(f, a, b, limit=100)
        total += v
        a = b
    # past 400 lobes phi <= (1 / (r L))^2 and |psi| ~ log r, so the tail is negligible
    return 2 / math.pi * 2 * total


def s1_s2_empirical(tallies: Mapping[int, PrimeTally] | object, X: float, sigma: float,
                    excluded: set[int] | None = None) -> ExplicitFormulaReport:
    """S1, S2 over a family from per-prime tallies, with the rank-bound assembly.

    tallies maps every prime p <= X^sigma outside `excluded` to its PrimeTally (or to a
    LocalStatistics).  A missing prime is a family/prime-range mismatch.
    """
    tf = TestFunction(sigma)
    if X <= 1:
        raise BadInputError("X must exceed 1")
    L = math.log(X)
    excluded = excluded or set()
    ps = [p for p in _primes_upto(math.exp(sigma * L)).tolist() if p not in excluded]
    data = {}
    for p in ps:
        if p not in tallies:
            raise BadInputError(f"no tally for p={p} <= X^sigma")
        t = tallies[p]
        data[p] = t if isinstance(t, PrimeTally) else tally_from_stats(t)
    sizes = {t.count for t in data.values()}
    if len(sizes) > 1:
        raise BadInputError("tallies come from families of different sizes")
    n = sizes.pop() if sizes else 0
    if n == 0:
        raise BadInputError("empty family")
    S1 = 0.0
    S2 = 0.0
    for p, t in data.items():
        lp = math.log(p)
        S1 += lp / math.sqrt(p) * tf.phi_hat(lp / L) * t.sum_a1
        S2 += lp / p * tf.phi_hat(2 * lp / L) * t.sum_a2
    S1 *= 2 / (L * n)
    S2 *= 2 / (L * n)
    rank_bound = (12 * tf.phi_hat0 - S1 - S2) / tf.phi0
    budget = {
        "higher_prime_powers": higher_power_budget(X, sigma) / tf.phi0,
        "digamma_integral": abs(digamma_integral(X, sigma)) / tf.phi0,
        "conductor_constant": tf.phi_hat0 * math.log(16 * 54) / L / tf.phi0,
        "excluded_primes": sorted(excluded & set(_primes_upto(math.exp(sigma * L)).tolist())),
    }
    return ExplicitFormulaReport(X, sigma, S1, S2, -tf.phi0 / 2, rank_bound, n, len(data), budget)


def limiting_rank_bound(sigma: float) -> float:
    """12 phi_hat(0) / phi(0) + 1/2 = 12 / sigma + 1/2."""
    return 12 / sigma + 0.5


def family_report(level, X: float, sigma: float, materialize: bool = False) -> ExplicitFormulaReport:
    """S1, S2 and the rank bound for the stored family of a level at height X.

    Primes dividing 6N or bad for the parametrization are skipped and listed in the budget.
    With materialize=False the sums run over parameter points (see stream_statistics).
    """
    from .family_count import candidate_bad_primes
    from .parametrizations import builtin_parametrization
    from .torsion_families import generate_family, local_statistics, stream_statistics

    fam = builtin_parametrization(level)
    L = math.log(X)
    ps = _primes_upto(math.exp(sigma * L)).tolist()
    excluded = {p for p in ps if (6 * fam.level.level) % p == 0 or p in candidate_bad_primes(fam)}
    good = [p for p in ps if p not in excluded]
    if materialize:
        family = generate_family(fam, X)
        stats = {p: local_statistics(family, p) for p in good}
    else:
        stats = stream_statistics(fam, X, good)
    return s1_s2_empirical(stats, X, sigma, excluded)
