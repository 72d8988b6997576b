import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rqf import InadmissiblePayoff, MarketParams, NonPositiveTime
from rqf.gauge import Grid, Variant, gauge_params
from rqf.kernel_pricer import (INF, GrowthClass, KernelQuery, Payoff, Piece, binary_payoff,
                               butterfly_payoff, call_payoff, cauchy_kernel, check_integrability,
                               constant_payoff, delta_limit_deviation, harmonicity_study,
                               indicator_payoff, kernel_field, price_kernel, pricing_kernel,
                               put_payoff, semigroup_check, zero_payoff)

# sigma^2/2 = r, so the log-price gauge exponent a vanishes
A_ZERO = MarketParams(0.2, 0.02, 0.04)


def test_cauchy_examples():
    assert cauchy_kernel(0.0, 1.0, 1.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert cauchy_kernel(1.0, 1.0, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert cauchy_kernel(0.7, 2.0, 3.0) == cauchy_kernel(-0.7, 2.0, 3.0)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_cauchy_rejects_non_positive_time(t):
    with pytest.raises(NonPositiveTime):
        cauchy_kernel(0.0, t, 1.0)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("q", [0.1, 1.0, 10.0])
def test_cauchy_normalised(t, q):
    s = math.sqrt(q) * t
    f = lambda u: cauchy_kernel(u, t, q)
    # split at the half-width so scipy sees the peak
    val = sum(integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13)[0]
              for a, b in ((-np.inf, -s), (-s, s), (s, np.inf)))
    assert val == pytest.approx(1.0, abs=1e-8)
    # arctan antiderivative
    assert (math.atan(1e15 / s) - math.atan(-1e15 / s)) / math.pi == pytest.approx(1.0, abs=1e-12)


def test_pricing_kernel_closed_form():
    # K(0, 1) = exp(b) * G(0, 1), b = (sigma^2/2 + r)^2 / (2 sigma^2) - q / sigma^2 = -0.98
    G = math.sqrt(0.04) / (math.pi * 0.04)
    assert cauchy_kernel(0.0, 1.0, 0.04) == pytest.approx(G, rel=1e-15)
    assert G == pytest.approx(1.591549, abs=1e-6)
    K = pricing_kernel(0.0, 1.0, A_ZERO)
    assert K == pytest.approx(math.exp(-0.98) * G, rel=1e-14)
    assert K == pytest.approx(0.597326, abs=1e-6)


def test_pricing_kernel_is_cauchy_when_gauge_is_trivial():
    p = MarketParams(0.2, 0.02, 2 * 0.02**2)  # a = 0 and b = 0
    g = gauge_params(p, Variant.KLEIN_GORDON)
    assert abs(g.a) < 1e-15 and abs(g.b) < 1e-15
    u = np.linspace(-3, 3, 13)
    assert np.allclose(pricing_kernel(u, 0.5, p), cauchy_kernel(u, 0.5, p.q), rtol=1e-13)


@given(st.floats(-3, 3), st.floats(0.1, 2), st.floats(0.05, 1), st.floats(0, 0.2),
       st.floats(1e-3, 10))
def test_pricing_kernel_identities(u, t, sigma, rate, q):
    p = MarketParams(sigma, rate, q)
    g = gauge_params(p, Variant.KLEIN_GORDON)
    if abs(g.a * u) + abs(g.b * t) > 600:
        return
    K = pricing_kernel(u, t, p)
    expected = math.exp(g.a * u + g.b * t) * cauchy_kernel(u, t, q)
    assert K == pytest.approx(expected, rel=1e-13)
    assert K / pricing_kernel(-u, t, p) == pytest.approx(math.exp(2 * g.a * u), rel=1e-12)


def test_growth_classes_of_constructors():
    assert call_payoff(100).growth.kind is GrowthClass.BOUNDED_LEFT
    assert call_payoff(100).growth.order == 1.0
    assert put_payoff(100).growth.kind is GrowthClass.BOUNDED
    assert binary_payoff(100).growth.kind is GrowthClass.BOUNDED
    assert butterfly_payoff(90, 100, 110).growth.kind is GrowthClass.COMPACT
    assert indicator_payoff(-1, 1).growth.kind is GrowthClass.COMPACT
    assert constant_payoff(2.0).growth.kind is GrowthClass.BOUNDED
    assert zero_payoff().support() == (0.0, 0.0)


def test_payoff_tiling_validated():
    with pytest.raises(ValueError):
        Payoff((Piece(-INF, 0.0), Piece(1.0, INF)))
    with pytest.raises(ValueError):
        Payoff((Piece(0.0, INF),))


def test_payoff_values():
    zeta = np.log([80.0, 95.0, 100.0, 105.0, 120.0])
    assert np.allclose(call_payoff(100)(zeta), [0, 0, 0, 5, 20])
    assert np.allclose(put_payoff(100)(zeta), [20, 5, 0, 0, 0])
    bf = butterfly_payoff(90, 100, 110)
    S = np.array([85, 90, 95, 100, 105, 110, 115.0])
    assert np.allclose(bf(np.log(S)), [0, 0, 5, 10, 5, 0, 0], atol=1e-12)
    # asymmetric strikes still give a tent closing at k3
    bf2 = butterfly_payoff(90, 100, 120)
    assert np.allclose(bf2(np.log([100.0, 110.0, 120.0, 130.0])), [10, 5, 0, 0], atol=1e-12)


@given(st.floats(0.05, 1), st.floats(0, 0.3))
def test_call_always_inadmissible(sigma, rate):
    v = check_integrability(call_payoff(100), MarketParams(sigma, rate, 1.0))
    assert not v and "right tail" in v.reason
    assert v.right_exponent == pytest.approx(0.5 + rate / sigma**2)


def test_put_admissibility_threshold():
    sigma = 0.2
    assert check_integrability(put_payoff(100), MarketParams(sigma, 0.05, 1.0))
    assert check_integrability(put_payoff(100), MarketParams(sigma, 0.02, 1.0))
    v = check_integrability(put_payoff(100), MarketParams(sigma, 0.01, 1.0))
    assert not v and "left tail" in v.reason


@given(st.floats(0.05, 2), st.floats(0, 0.3), st.floats(1e-4, 1e4))
def test_compact_payoffs_always_admissible(sigma, rate, q):
    p = MarketParams(sigma, rate, q)
    assert check_integrability(butterfly_payoff(90, 100, 110), p)
    assert check_integrability(indicator_payoff(-1, 1), p)


def test_indicator_closed_form():
    res = price_kernel(indicator_payoff(-1.0, 1.0), KernelQuery(0.0, 1.0, A_ZERO, tol=1e-8))
    expected = math.exp(-0.98) * (2 / math.pi) * math.atan(5.0)
    assert abs(res.price - expected) < 1e-8
    assert expected == pytest.approx(0.3281472857, abs=1e-10)
    assert res.admissible and not res.truncated
    assert res.error_estimate <= 1e-8


def test_zero_and_constant_payoffs():
    q = KernelQuery(0.3, 0.7, A_ZERO, tol=1e-10)
    assert price_kernel(zero_payoff(), q).price == 0.0
    b = gauge_params(A_ZERO, Variant.KLEIN_GORDON).b
    assert price_kernel(constant_payoff(1.0), q).price == pytest.approx(
        math.exp(b * 0.7), abs=1e-10)


def test_inadmissible_call_raises_with_reason():
    with pytest.raises(InadmissiblePayoff) as info:
        price_kernel(call_payoff(100), KernelQuery(math.log(100), 1.0, MarketParams(0.2, 0.05, 1)))
    assert "tail exponent" in info.value.reason


def test_force_truncate_prices_and_labels():
    p = MarketParams(0.2, 0.05, 1e-3)
    res = price_kernel(call_payoff(100), KernelQuery(math.log(100), 1.0, p), force_truncate=6.0)
    assert res.truncated and res.price > 0


def test_t_zero_returns_payoff():
    x = math.log(95.0)
    res = price_kernel(put_payoff(100), KernelQuery(x, 0.0, MarketParams(0.2, 0.05, 1.0)))
    assert res.price == pytest.approx(5.0)
    with pytest.raises(NonPositiveTime):
        KernelQuery(0.0, -1.0, A_ZERO)


@settings(max_examples=20, deadline=None)
@given(st.floats(4.3, 4.9), st.floats(0.1, 3), st.floats(0.1, 1), st.floats(0, 0.2))
def test_nonnegative_payoff_gives_nonnegative_price(x, t, sigma, rate):
    p = MarketParams(sigma, rate, 0.01)
    res = price_kernel(butterfly_payoff(90, 100, 110), KernelQuery(x, t, p, tol=1e-10))
    assert res.price >= -1e-10


def test_kernel_field_matches_pointwise():
    p = MarketParams(1.0, 0.05, 1e-3)
    g = Grid(-0.3, 0.2, 10.0, 20.0, 5, 4)
    bf = butterfly_payoff(0.5, 1.0, 1.5)
    fld = kernel_field(bf, g, p)
    X, T = g.mesh()
    ref = price_kernel(bf, KernelQuery(X[2, 3], T[2, 3], p, 1e-10)).price
    assert fld.values[2, 3] == ref


@pytest.mark.parametrize("t1, t2, q", [(1, 2, 1), (0.5, 0.5, 4), (0.5, 0.5, 1)])
def test_semigroup(t1, t2, q):
    assert semigroup_check(t1, t2, q, tol=1e-6) < 1e-6


def test_delta_limit_monotone():
    devs = [delta_limit_deviation(1.0, eps, 1.0) for eps in (0.1, 0.01, 0.001)]
    assert devs[0] > devs[1] > devs[2]


def test_harmonic_extension_second_order():
    f = lambda z: (1 - z * z) ** 2
    res, slope = harmonicity_study(f, 0.3, 0.5, 1.0, [0.1, 0.05, 0.025],
                                   support=(-1.0, 1.0))
    assert abs(slope - 2.0) <= 0.3
    assert np.all(np.diff(res) < 0)
