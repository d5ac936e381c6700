import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobile_sampling.bandlimited import BandlimitedFunction, synthesize
from mobile_sampling.convex import Ball, Box
from mobile_sampling.geometry import theorem_constant
from mobile_sampling.nodal import (
    DegenerateSliceError,
    beta_integral,
    beta_integral_closed_form,
    count_zeros,
    find_zeros,
    jensen_bound_check,
    ronkin_inequality_check,
    log_integral_constant_oracle,
    log_integral_term,
    nodal_area,
    ronkin_average,
    ronkin_bound_constant,
    zero_count_profile,
)


def cosine(d=1, freq=1.0):
    xi = np.zeros((2, d))
    xi[0, 0], xi[1, 0] = freq, -freq
    return BandlimitedFunction(xi, np.array([0.5, 0.5]), Box([freq] + [freq] * (d - 1)), real_valued=True)


def test_cos_zeros():
    g = cosine()
    z = find_zeros(g, -1.0, 1.0)
    assert np.allclose(np.sort(z), [-0.75, -0.25, 0.25, 0.75], atol=1e-10)
    assert count_zeros(g, 1.0) == 4
    prof = zero_count_profile(g, [0.5, 1.0, 2.0])
    assert list(prof.counts) == [2, 4, 8]


def test_double_zeros_counted_twice():
    # cos^2(2 pi t) = 1/2 + cos(4 pi t)/2 touches zero at t = 1/4 + k/2
    g = BandlimitedFunction(np.array([[0.0], [2.0], [-2.0]]), np.array([0.5, 0.25, 0.25]), Box([2.0]),
                            real_valued=True)
    assert count_zeros(g, 1.0) == 8


def test_callable_zero_finding_needs_bandwidth():
    with pytest.raises(ValueError):
        find_zeros(lambda t: np.sin(t), -1, 1)
    z = find_zeros(lambda t: np.sin(2 * math.pi * t), -0.6, 0.6, bandwidth=1.0)
    assert np.allclose(np.sort(z), [-0.5, 0.0, 0.5], atol=1e-10)


def test_degenerate_slice():
    g = BandlimitedFunction(np.array([[0.0]]), np.array([0.0]), Box([1.0]), real_valued=True)
    with pytest.raises(DegenerateSliceError):
        find_zeros(g, -1, 1)


def test_jensen_cos():
    rep = jensen_bound_check(cosine(), np.zeros(1), np.ones(1), 2.0)
    assert rep.rhs == pytest.approx(8.0)
    assert rep.lhs == pytest.approx(sum(math.log(2.0 / t) for t in (0.25, 0.75, 1.25, 1.75)) * 2)
    assert rep.passed


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1.0, 5.0, 10.0]))
def test_jensen_random_slices(seed, r):
    f = synthesize(Ball(2, 1.0), 6, rng=seed)
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal(2)
    theta /= np.linalg.norm(theta)
    assert jensen_bound_check(f, np.zeros(2), theta, r).passed


@pytest.mark.parametrize("d,exact", [(2, 4 * (math.sqrt(15 / 16) + math.sqrt(7 / 16))),
                                     (3, 2 * math.pi * 22 / 16)])
def test_nodal_area_of_planes(d, exact):
    est = nodal_area(cosine(d), np.zeros(d), 1.0, 40_000, 1)
    assert est.value == pytest.approx(exact, abs=4 * est.stderr + 1e-9)


def test_beta_integral():
    for d in (2, 3, 4):
        assert beta_integral(d) == pytest.approx(beta_integral_closed_form(d), abs=1e-6)
        assert ronkin_bound_constant(d) == pytest.approx(theorem_constant(d) / d)


@pytest.mark.parametrize("d", [2, 3])
def test_log_integral_constant_oracle(d):
    level = 0.7
    f = BandlimitedFunction.constant(d, math.exp(-level), Ball(d, 1.0))
    for R in (1.0, 4.0):
        est = log_integral_term(f, R, 40_000, 2)
        assert est.value == pytest.approx(log_integral_constant_oracle(d, R, level), abs=4 * est.stderr)


def test_ronkin_inequality_terms_scale_with_radius():
    f = synthesize(Ball(2, 1.0), 5, rng=6)
    R = 4.0
    a = ronkin_inequality_check(f, R, 500, 2000, rng=3)
    b = ronkin_inequality_check(f.dilated(R), 1.0, 500, 2000, rng=3)
    assert a.width_term == pytest.approx(b.width_term / R, rel=1e-9)
    assert a.ronkin == pytest.approx(b.ronkin / R, rel=1e-6)
    assert a.log_term == pytest.approx(b.log_term / R, rel=1e-9)


def test_ronkin_inequality_holds_for_one_function():
    f = synthesize(Ball(2, 1.0), 6, rng=12)
    rep = ronkin_inequality_check(f, 10.0, 2000, 10_000, rng=1)
    assert rep.passed
    assert rep.line_violations == 0


def test_ronkin_profile_is_monotone():
    f = synthesize(Ball(2, 1.0), 6, rng=5)
    est = ronkin_average(f, 5.0, 1000, 2)
    assert np.all(np.diff(est.areas) >= 0)
    assert est.bound == pytest.approx(theorem_constant(2) / 2 * 2.0)
