"""Unit tests for the closed-form distributions, the quadrature backend,
the enumeration oracle, and the horizon sizing bound."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstrings import exact
from bernstrings.exact import (
    BetaMixing,
    CylinderPattern,
    PointMixing,
    QuadratureError,
    beta_expectation,
    beta_fn,
    cylinder_prob_bern1,
    cylinder_prob_integral,
    cylinder_prob_product,
    enumerate_truncated,
    horizon_for_bias,
    mixture_moments,
    mixture_pmf,
    overdispersion_z1,
    plus_model_probs,
    second_success_pmf,
    swapped_model_probs,
    truncation_bias_bound,
)
from bernstrings.streams import child_rng

# strategies shared by the identity properties below
PARAMS = st.floats(0.1, 5.0, allow_nan=False, allow_infinity=False)
GAPS = st.lists(st.integers(1, 9), min_size=1, max_size=6)


# ---------------------------------------------------------------------------
# Beta function and quadrature
# ---------------------------------------------------------------------------


def test_beta_fn_trivia():
    assert beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert beta_fn(2.0, 2.0) == pytest.approx(1.0 / 6.0, rel=1e-14)


def test_beta_ratio_recurrence():
    # B(b, a+1) / B(b, a) = a / (a + b), here at a = 1.5, b = 0.7
    a, b = 1.5, 0.7
    ratio = beta_fn(b, a + 1.0) / beta_fn(b, a)
    assert ratio == pytest.approx(a / (a + b), rel=1e-13)


def test_beta_expectation_matches_moment_formula():
    for alpha, beta, k in [(2.5, 1.5, 2), (0.5, 0.25, 3), (1.0, 1.0, 1), (3.0, 7.0, 5)]:
        got = beta_expectation(alpha, beta, lambda x: x**k)
        want = np.prod([(alpha + i) / (alpha + beta + i) for i in range(k)])
        assert got == pytest.approx(want, rel=1e-9)


def test_beta_expectation_rejects_bad_params():
    with pytest.raises(ValueError):
        beta_expectation(0.0, 1.0, lambda x: x)


def test_quadrature_error_on_rough_integrand():
    # a jump discontinuity defeats node doubling and must fail loudly
    with pytest.raises(QuadratureError):
        beta_expectation(2.0, 2.0, lambda x: (x > 0.37).astype(float))


# ---------------------------------------------------------------------------
# cylinder probabilities
# ---------------------------------------------------------------------------


def test_cylinder_pattern_validation():
    with pytest.raises(ValueError):
        CylinderPattern(gaps=())
    with pytest.raises(ValueError):
        CylinderPattern(gaps=(0, 1))


def test_product_single_marginal():
    for a, b in [(1.0, 1.0), (2.0, 3.0), (0.5, 0.25)]:
        got = cylinder_prob_product(a, b, CylinderPattern(gaps=(1,)))
        assert got == pytest.approx(a / (a + b), rel=1e-14)


def test_product_two_ones_hand_value():
    got = cylinder_prob_product(1.0, 1.0, CylinderPattern(gaps=(1, 1)))
    assert got == pytest.approx(1.0 / 6.0, rel=1e-14)


def test_integral_single_marginal():
    for a, b in [(1.0, 1.0), (2.0, 3.0), (1.5, 0.7)]:
        got = cylinder_prob_integral(a, b, CylinderPattern(gaps=(1,)))
        assert got == pytest.approx(a / (a + b), rel=1e-12)


def test_integral_two_ones_hand_value():
    got = cylinder_prob_integral(1.0, 1.0, CylinderPattern(gaps=(1, 1)))
    assert got == pytest.approx(1.0 / 6.0, rel=1e-12)


@given(PARAMS, PARAMS, GAPS)
@settings(max_examples=200, deadline=None)
def test_product_equals_integral(a, b, gaps):
    pattern = CylinderPattern(gaps=tuple(gaps))
    lhs = cylinder_prob_product(a, b, pattern)
    rhs = cylinder_prob_integral(a, b, pattern)
    assert rhs == pytest.approx(lhs, rel=1e-10)
    assert 0.0 < lhs <= 1.0


def test_integral_small_b_stays_consistent():
    pattern = CylinderPattern(gaps=(2, 1, 3))
    lhs = cylinder_prob_product(1.0, 1e-6, pattern)
    rhs = cylinder_prob_integral(1.0, 1e-6, pattern)
    assert rhs == pytest.approx(lhs, rel=1e-10)


def test_forced_start_cylinders():
    one = CylinderPattern(gaps=(1,))
    assert cylinder_prob_bern1(2.0, 3.0, one) == pytest.approx(1.0, rel=0)
    got = cylinder_prob_bern1(1.0, 2.0, CylinderPattern(gaps=(1, 1)))
    assert got == pytest.approx(1.0 / 3.0, rel=1e-14)
    got = cylinder_prob_bern1(1.0, 2.0, CylinderPattern(gaps=(1, 2)))
    assert got == pytest.approx(1.0 / 6.0, rel=1e-14)


# ---------------------------------------------------------------------------
# second-success position
# ---------------------------------------------------------------------------


def test_second_success_degenerate_b0():
    assert second_success_pmf(2.0, 0.0, 2) == 1.0
    assert second_success_pmf(2.0, 0.0, 3) == 0.0
    np.testing.assert_array_equal(
        second_success_pmf(1.0, 0.0, np.arange(2, 6)), [1.0, 0.0, 0.0, 0.0]
    )


def test_second_success_hand_value():
    # p_3 at (1, 1): miss at 2 then hit at 3 gives (1/2) * (1/3)
    assert second_success_pmf(1.0, 1.0, 3) == pytest.approx(1.0 / 6.0, rel=1e-14)


def test_second_success_normalization():
    # at (1, 2) the truncated mass is exactly 1 - 2/(M+1)
    m = 1_000_000
    ns = np.arange(2, m + 1)
    total = float(second_success_pmf(1.0, 2.0, ns).sum())
    assert total == pytest.approx(1.0 - 2.0 / (m + 1), abs=1e-9)
    # at (2, 1) the tail is O(1/M^2), so the sum reaches 1 to 1e-9
    total = float(second_success_pmf(2.0, 1.0, ns).sum())
    assert total == pytest.approx(1.0, abs=1e-9)


def test_second_success_scalar_matches_vector():
    ns = np.arange(2, 40)
    vec = second_success_pmf(1.3, 0.6, ns)
    for n, p in zip(ns, vec):
        assert second_success_pmf(1.3, 0.6, int(n)) == pytest.approx(float(p), rel=1e-13)


# ---------------------------------------------------------------------------
# moments and overdispersion
# ---------------------------------------------------------------------------


def test_overdispersion_trivia():
    assert overdispersion_z1(3.0, 1.0) == 0.0
    assert overdispersion_z1(1.0, 2.0) == pytest.approx(1.0 / 18.0, rel=1e-14)


@given(PARAMS)
@settings(max_examples=50, deadline=None)
def test_overdispersion_sign(a):
    assert overdispersion_z1(a, 0.5) < 0
    assert overdispersion_z1(a, 2.0) > 0


def test_first_order_moments_match_mixture():
    # for b > 1 the forced-start count is a Poisson mixture, so the two
    # independent moment routes must agree
    for a, b in [(1.0, 2.0), (2.0, 3.0), (1.5, 2.5)]:
        mean, var = exact.bern1_z1_moments(a, b)
        m2, v2 = mixture_moments(a, BetaMixing(b - 1.0, a + 1.0), 1)
        assert mean == pytest.approx(m2, rel=1e-12)
        assert var == pytest.approx(v2, rel=1e-12)


def test_first_order_moments_at_b1():
    mean, var = exact.bern1_z1_moments(1.0, 1.0)
    assert mean == pytest.approx(1.0, rel=1e-14)
    assert var == pytest.approx(1.0, rel=1e-14)


# ---------------------------------------------------------------------------
# Poisson mixture law
# ---------------------------------------------------------------------------


def test_mixture_pmf_point_mass():
    got = mixture_pmf(1.0, PointMixing(), 2, 0)
    assert got == pytest.approx(math.exp(-0.5), rel=1e-14)


def test_mixture_pmf_uniform_closed_form():
    got = mixture_pmf(1.0, BetaMixing(1.0, 1.0), 1, 0)
    assert got == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)


def test_mixture_pmf_normalization():
    total = sum(mixture_pmf(2.0, BetaMixing(3.0, 2.0), 1, j) for j in range(51))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_mixture_moments_point_mass():
    for a, k in [(1.0, 1), (2.0, 3), (0.5, 2)]:
        mean, var = mixture_moments(a, PointMixing(), k)
        assert mean == pytest.approx(a / k, rel=1e-14)
        assert var == pytest.approx(a / k, rel=1e-14)


def test_mixture_moments_uniform_mean():
    mean, _ = mixture_moments(1.0, BetaMixing(1.0, 1.0), 1)
    assert mean == pytest.approx(0.5, rel=1e-13)


def test_mixture_moments_match_pmf_summation():
    # pmf summation is the oracle for the closed-form moment route,
    # including non-integer parameters
    for a, mixing, k in [
        (1.0, BetaMixing(1.0, 1.0), 1),
        (2.0, BetaMixing(3.0, 2.0), 2),
        (1.5, BetaMixing(2.5, 1.5), 2),
        (0.7, BetaMixing(0.4, 2.2), 1),
        (1.0, PointMixing(), 3),
    ]:
        mean, var = mixture_moments(a, mixing, k)
        js = np.arange(0, 80)
        p = np.array([mixture_pmf(a, mixing, k, int(j)) for j in js])
        sum_mean = float((js * p).sum())
        sum_var = float((js * js * p).sum()) - sum_mean**2
        assert mean == pytest.approx(sum_mean, abs=1e-8)
        assert var == pytest.approx(sum_var, abs=1e-8)


def test_degenerate_upper_point_mass_is_zero_intensity():
    assert exact.mixture_intensity(2.0, 3, 1.0) == 0.0
    assert mixture_pmf(2.0, PointMixing(1.0), 3, 0) == pytest.approx(1.0, rel=0)


# ---------------------------------------------------------------------------
# two dependent variants
# ---------------------------------------------------------------------------


def test_plus_model_hand_values():
    r = plus_model_probs(1.0, 1.0)
    assert r.y1 == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert r.y1_and_y2 == pytest.approx(1.0 / 8.0, rel=1e-14)
    assert r.y2 == pytest.approx(7.0 / 24.0, rel=1e-14)


@given(PARAMS, PARAMS)
@settings(max_examples=100, deadline=None)
def test_plus_model_always_dependent(a, b):
    r = plus_model_probs(a, b)
    assert r.product_gap != 0.0
    assert 0.0 < r.y1_and_y2 <= min(r.y1, r.y2)


def test_swapped_model_constants():
    r = swapped_model_probs()
    assert r.y2 == pytest.approx(0.25, rel=0)
    assert r.y3 == pytest.approx(11.0 / 36.0, rel=1e-14)
    assert r.y2_and_y3 == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert r.y2c_and_y3 == pytest.approx(5.0 / 36.0, rel=1e-14)
    assert r.product == pytest.approx(11.0 / 144.0, rel=1e-14)
    assert r.product != r.y2_and_y3


# ---------------------------------------------------------------------------
# enumeration oracle
# ---------------------------------------------------------------------------


def test_enumeration_single_position_is_zero():
    dist = enumerate_truncated(1.0, 1.0, m=1, dmax=3)
    assert dist.outcomes == (((0, 0, 0), 0),)
    assert float(dist.probabilities[0]) == 1.0


def test_enumeration_two_positions_hand_value():
    dist = enumerate_truncated(1.0, 1.0, m=2, dmax=2)
    marg = dist.marginal_exact(1)
    assert marg[1] == Fraction(1, 6)
    assert marg[0] == Fraction(5, 6)


def test_enumeration_probabilities_are_exact_fractions():
    dist = enumerate_truncated(2.0, 1.0, m=8, dmax=3)
    assert all(isinstance(p, Fraction) for p in dist.probabilities)
    assert sum(dist.probabilities) == Fraction(1)


def test_enumeration_float_route_matches_exact():
    ex = enumerate_truncated(2.0, 1.0, m=10, dmax=4)
    fl = enumerate_truncated(2.0, 1.0, m=10, dmax=4, exact=False)
    assert ex.outcomes == fl.outcomes
    for pe, pf in zip(ex.probabilities, fl.probabilities):
        assert float(pe) == pytest.approx(pf, rel=1e-12)


def test_enumeration_marginal_float_matches_fraction():
    dist = enumerate_truncated(1.0, 2.0, m=9, dmax=2)
    exact_marg = dist.marginal_exact(2)
    float_marg = dist.marginal(2)
    assert set(exact_marg) == set(float_marg)
    for j, p in exact_marg.items():
        assert float_marg[j] == pytest.approx(float(p), rel=1e-13)


def test_enumeration_forced_start_first_bit():
    # under the forced-start model every prefix begins with a 1, so a
    # second success at position 2 happens with probability a/(a+b)
    dist = enumerate_truncated(1.0, 1.0, model="bern1", m=2, dmax=1)
    assert dist.marginal_exact(1)[1] == Fraction(1, 2)


def test_enumeration_rejects_bad_horizon():
    with pytest.raises(ValueError):
        enumerate_truncated(1.0, 1.0, m=0)
    with pytest.raises(ValueError):
        enumerate_truncated(1.0, 1.0, m=25)


# ---------------------------------------------------------------------------
# truncation bias bound and horizon sizing
# ---------------------------------------------------------------------------


def test_bias_bound_telescopes_at_a1_b0():
    for n in (10, 100, 1000):
        got = truncation_bias_bound(1.0, 0.0, 1, n)
        assert got == pytest.approx(1.0 / n, rel=1e-12)


def test_bias_bound_monotone_to_zero():
    ns = [8, 16, 64, 512, 4096, 1 << 20]
    vals = [truncation_bias_bound(1.5, 2.0, 3, n) for n in ns]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 1e-5


def test_horizon_for_bias_meets_target():
    for a, b, dmax, target in [(1.0, 0.0, 1, 1e-2), (2.0, 1.0, 4, 1e-3), (1.0, 0.5, 2, 1e-4)]:
        n = horizon_for_bias(a, b, dmax, target)
        assert truncation_bias_bound(a, b, dmax, n) <= target
        if n > dmax + 1:
            assert truncation_bias_bound(a, b, dmax, n - 1) > target


def test_marginal_probabilities_are_probabilities():
    rng = child_rng(41, 0)
    for _ in range(50):
        a = 0.2 + 2.8 * rng.random()
        b = 2.9 * rng.random()
        p = exact.second_success_pmf(a, b, np.arange(2, 30))
        assert np.all(p >= 0) and float(p.sum()) <= 1.0 + 1e-12
