import math

import numpy as np
import pytest

from ecstats.analytic import (TestFunction, chebyshev_theta, digamma_integral, family_report,
                              higher_power_budget, limiting_rank_bound, phi, phi_hat, s1_s2_empirical,
                              s2_analytic_sum, PrimeTally)
from ecstats.errors import BadInputError, ResourceLimitError
from ecstats.levels import gamma1


def test_values_at_zero():
    tf = TestFunction(0.6)
    assert tf.phi(0) == pytest.approx(0.09)
    assert tf.phi_hat(0) == pytest.approx(0.15)
    assert tf.phi_hat(0.6) == 0 and tf.phi_hat(-0.7) == 0
    assert phi(0.0, 0.6) == tf.phi0 and phi_hat(0.0, 0.6) == tf.phi_hat0


def test_phi_nonnegative_and_even():
    x = np.linspace(-40, 40, 4001)
    v = phi(x, 0.6)
    assert (v >= 0).all()
    assert np.allclose(v, phi(-x, 0.6))


@pytest.mark.parametrize("sigma", [0.3, 0.6, 1.0])
def test_fourier_pair(sigma):
    tf = TestFunction(sigma)
    for x in np.linspace(-6, 6, 49):
        assert abs(tf.inverse_transform(x) - tf.phi(x)) < 1e-8


def test_theta():
    assert chebyshev_theta(10) == pytest.approx(math.log(2 * 3 * 5 * 7))
    assert chebyshev_theta(1) == 0
    assert abs(chebyshev_theta(10**7) / 10**7 - 1) < 0.02
    with pytest.raises(ResourceLimitError):
        chebyshev_theta(10**9)


def test_s2_sum_limits():
    assert s2_analytic_sum(10, 0.6) == 0  # X^(sigma/2) < 2: empty sum
    assert s2_analytic_sum(10**6, 0.01) == 0
    for X in (1e3, 1e5, 1e7):
        dev = abs(s2_analytic_sum(X, 0.6) - 0.09 / 2) * math.log(X)
        assert dev < 1
    with pytest.raises(BadInputError):
        s2_analytic_sum(1, 0.6)


def test_rank_bound_limit():
    assert limiting_rank_bound(0.6) == pytest.approx(20.5)
    assert limiting_rank_bound(2 / 3) == pytest.approx(18.5)


def test_budget_terms_are_finite():
    assert 0 <= higher_power_budget(1e5, 0.6) < 1
    assert math.isfinite(digamma_integral(1e5, 0.6))


def test_empirical_sums_reject_missing_primes():
    tallies = {2: PrimeTally(2, 10, 0.0, 0.0)}
    with pytest.raises(BadInputError):
        s1_s2_empirical(tallies, 100, 0.6)


def test_empirical_sums_by_hand():
    # X = 100, sigma = 0.6: primes up to 100^0.6 = 15.8
    ps = [2, 3, 5, 7, 11, 13]
    tallies = {p: PrimeTally(p, 4, 1.0, -2.0) for p in ps}
    r = s1_s2_empirical(tallies, 100, 0.6)
    L = math.log(100)
    s1 = sum(math.log(p) / math.sqrt(p) * max(0.6 - math.log(p) / L, 0) / 4 for p in ps) * 2 / (L * 4)
    s2 = sum(math.log(p) / p * max(0.6 - 2 * math.log(p) / L, 0) / 4 * -2 for p in ps) * 2 / (L * 4)
    assert r.S1 == pytest.approx(s1) and r.S2 == pytest.approx(s2)
    assert r.rank_bound == pytest.approx((12 * 0.15 - s1 - s2) / 0.09)
    assert r.S2_pred == pytest.approx(-0.045)


def test_family_report_gamma1_5():
    r = family_report(gamma1(5), 2000, 0.6)
    assert r.S2 < 0
    assert 15 < r.rank_bound < 25
    assert 5 in r.budget_terms["excluded_primes"]
    assert '"rank_bound"' in r.to_json()
