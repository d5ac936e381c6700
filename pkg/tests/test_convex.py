import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobile_sampling.convex import (
    ApproximateMembershipError,
    Ball,
    Box,
    Ellipsoid,
    SymmetricPolytope,
    body_from_dict,
    diameter,
    dominates,
    inflate,
    mean_width,
)
from mobile_sampling.geometry import build_sphere_quadrature, unit_ball_volume


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_ball_mean_width(d, R):
    assert abs(mean_width(Ball(d, R)) - 2 * R) < 1e-8


@pytest.mark.parametrize("d", [2, 3, 4])
def test_cube_mean_width_closed_form(d):
    W = mean_width(Box([1.0] * d))
    assert abs(W - 4 * unit_ball_volume(d - 1) / unit_ball_volume(d)) < 1e-5


def test_cube3_is_three():
    assert mean_width(Box([1.0, 1.0, 1.0])) == pytest.approx(3.0, abs=1e-6)


def test_ellipse_perimeter_relation():
    # in the plane W = perimeter / pi (Cauchy)
    a, b = 2.0, 0.5
    from scipy.special import ellipe

    perimeter = 4 * a * ellipe(1 - (b / a) ** 2)
    assert mean_width(Ellipsoid((a, b))) == pytest.approx(perimeter / math.pi, rel=1e-8)


def test_polytope_validation():
    square = SymmetricPolytope.from_vertices([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert mean_width(square) == pytest.approx(mean_width(Box([1.0, 1.0])), abs=1e-6)
    with pytest.raises(ValueError):
        SymmetricPolytope(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]), np.eye(2))
    with pytest.raises(ValueError):
        body_from_dict({"type": "polytope", "dimension": 2, "parameters": {"vertices": [[1, 0]]}})


def test_ball_rejects_bad_radius():
    with pytest.raises(ValueError):
        Ball(2, 0.0)
    with pytest.raises(ValueError):
        inflate(Ball(2, 1.0), -0.1)


shapes = [Ball(2, 1.0), Box([1.0, 0.3]), Ellipsoid((1.0, 2.0, 0.5)), Box([0.2, 0.4, 0.7])]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(shapes), st.floats(0.0, 5.0))
def test_minkowski_additivity(K, kappa):
    assert abs(mean_width(inflate(K, kappa)) - mean_width(K) - 2 * kappa) < 1e-7


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(shapes), st.floats(0.1, 10.0))
def test_mean_width_homogeneous(K, t):
    assert mean_width(K.scaled(t)) == pytest.approx(t * mean_width(K), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_monotone_under_inclusion(a, b):
    small, big = Ball(2, min(a, b)), Ball(2, max(a, b))
    assert dominates(big, small)
    assert mean_width(small) <= mean_width(big) + 1e-12


def test_width_bounded_by_diameter():
    for K in shapes:
        assert mean_width(K) <= diameter(K) + 1e-9


def test_support_of_box_is_l1_dual():
    K = Box([1.0, 2.0])
    theta = np.array([0.6, 0.8])
    assert K.support(theta) == pytest.approx(0.6 + 1.6)


def test_roundtrip_dicts():
    for K in shapes + [inflate(Box([1.0, 1.0]), 0.2)]:
        K2 = body_from_dict(K.to_dict())
        assert mean_width(K2) == pytest.approx(mean_width(K))


def test_inflated_membership():
    K = inflate(Box([1.0, 1.0]), 0.5)
    assert K.contains(np.array([1.2, 0.0]))
    assert not K.contains(np.array([1.6, 0.0]))


def test_quadrature_level_convergence():
    K = Box([1.0, 1.0, 1.0])
    w4 = mean_width(K, build_sphere_quadrature(3, 4))
    w5 = mean_width(K, build_sphere_quadrature(3, 5))
    assert abs(w4 - w5) < 1e-6
