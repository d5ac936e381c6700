import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobile_sampling.bandlimited import BandlimitedFunction, synthesize
from mobile_sampling.convex import Ball, Box
from mobile_sampling.remez import (
    GATE_C,
    MonotonePieces,
    log_integral_bound,
    log_integral_bound_check,
    log_integral_direct,
    log_integral_layer_cake,
    log_integral_trend,
    random_union_of_intervals,
    remez_check,
    sublevel_closed_form_cos,
    sublevel_decay_check,
    sublevel_measure,
)


def cosine():
    return BandlimitedFunction(np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]), Box([1.0]), real_valued=True)


def random_slice(seed, radius=1.0):
    f = synthesize(Ball(2, radius), 6, rng=seed)
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal(2)
    theta /= np.linalg.norm(theta)
    return f.slice(np.zeros(2), theta), rng


@pytest.mark.parametrize("eps", [1e-8, 1e-4, 0.1, 0.5, 0.9])
def test_cos_sublevel_closed_form(eps):
    assert sublevel_measure(cosine(), 2.0, eps) == pytest.approx(sublevel_closed_form_cos(eps, 2.0), rel=1e-7)


def test_cos_log_integral():
    g = cosine()
    assert log_integral_direct(g, 4.0) == pytest.approx(4 * math.log(2), abs=1e-8)
    assert log_integral_layer_cake(g, 4.0) == pytest.approx(4 * math.log(2), rel=1e-2)


def test_monotone_pieces_sup():
    g = cosine()
    pieces = MonotonePieces.build(g, 0.0, 1.0)
    assert pieces.sup_abs() == pytest.approx(1.0)
    assert pieces.sup_abs([(0.2, 0.3)]) == pytest.approx(abs(math.cos(2 * math.pi * 0.2)))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-6, 1.0))
def test_sublevel_monotone_in_epsilon(seed, eps):
    g, _ = random_slice(seed)
    pieces = MonotonePieces.build(g, 0.0, 3.0)
    a, b = pieces.sublevel_many(np.array([eps / 2, eps]))
    assert a <= b + 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1.0, 4.0]))
def test_remez_and_decay_pass_at_gate(seed, R):
    g, rng = random_slice(seed)
    F = random_union_of_intervals(R, rng)
    rep = remez_check(g, 1.0, R, F, GATE_C)
    assert rep.passed
    assert rep.minimal_C is not None and rep.minimal_C <= GATE_C
    assert sublevel_decay_check(g, 1.0, R, GATE_C).passed


def test_union_of_intervals_is_disjoint():
    rng = np.random.default_rng(0)
    for _ in range(50):
        F = random_union_of_intervals(4.0, rng)
        ends = np.array(F).ravel()
        assert np.all(np.diff(ends) >= 0)
        assert 0.0 <= ends[0] and ends[-1] <= 4.0


def test_remez_rejects_null_set():
    with pytest.raises(ValueError):
        remez_check(cosine(), 1.0, 1.0, [(0.5, 0.5)])


def test_log_integral_bound_and_consistency():
    g, _ = random_slice(3)
    rep = log_integral_bound_check(g, 1.0, 4.0)
    assert rep.consistent
    assert rep.passed
    lc = math.log(8.0)
    assert log_integral_bound(8.0, 1.0, 2.0) == pytest.approx(2.0 * (lc * 16 + lc + 16))


def test_log_integral_trend_decreasing():
    g, _ = random_slice(7)
    assert log_integral_trend(g).strictly_decreasing
