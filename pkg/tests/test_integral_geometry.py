import math

import numpy as np
import pytest

from mobile_sampling.geometry import unit_ball_volume
from mobile_sampling.integral_geometry import (
    crofton_area,
    kinematic_mass,
    sample_lines_hitting_ball,
    weighted_line_integral,
)
from mobile_sampling.surfaces import HyperplaneFamily, SphereShell


def test_kinematic_mass_matches_sampler():
    b = sample_lines_hitting_ball(3, 2.0, 10, 0)
    assert b.mass == pytest.approx(kinematic_mass(3, 2.0))
    assert kinematic_mass(2, 1.0) == pytest.approx(2 * math.pi * 2)
    # feet are orthogonal to directions and inside the ball
    assert np.allclose(np.sum(b.feet * b.directions, axis=1), 0.0, atol=1e-12)
    assert np.all(np.linalg.norm(b.feet, axis=1) <= 2.0)


def test_crofton_circle_and_sphere():
    est = crofton_area(SphereShell(np.zeros(2), 1.0), 2, 1.0, 100_000, 1)
    assert abs(est.value - 2 * math.pi) < 0.02 * 2 * math.pi
    est = crofton_area(SphereShell(np.zeros(3), 1.0), 3, 1.0, 100_000, 2)
    assert abs(est.value - 4 * math.pi) < 0.02 * 4 * math.pi


def test_crofton_segment_of_plane():
    # the part of the plane x1 = 0 inside B(0, 1) is a unit disc of area pi
    fam = HyperplaneFamily(np.array([1.0, 0.0, 0.0]), 1e300, 0.0)
    est = crofton_area(fam, 3, 1.0, 50_000, 4)
    assert est.value == pytest.approx(math.pi, abs=4 * est.stderr)


def test_crofton_discards_lines_inside_the_set():
    def counter(bundle):
        c = np.ones(len(bundle.directions))
        c[:5] = np.inf
        return c

    with pytest.warns(RuntimeWarning):
        est = crofton_area(counter, 2, 1.0, 1000, 0)
    assert est.discarded == 5


def test_crofton_stderr_slope():
    S = SphereShell(np.zeros(2), 1.0)
    ns = np.array([2000, 4000, 8000, 16000, 32000])
    se = [crofton_area(S, 2, 1.5, int(n), 10 + i).stderr for i, n in enumerate(ns)]
    slope = np.polyfit(np.log(ns), np.log(se), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_crofton_deterministic():
    S = SphereShell(np.zeros(2), 1.0)
    assert crofton_area(S, 2, 1.0, 5000, 9).value == crofton_area(S, 2, 1.0, 5000, 9).value


@pytest.mark.parametrize("d", [2, 3])
def test_identity_ball_and_annulus(d):
    ball = weighted_line_integral(lambda y: (np.linalg.norm(y, axis=1) <= 1.0).astype(float), d, 1.0, 200_000, 3)
    assert ball.agree(3.0)
    exact = d * unit_ball_volume(d) * unit_ball_volume(d - 1)
    assert ball.lhs == pytest.approx(exact, rel=0.02)
    assert ball.rhs == pytest.approx(exact, rel=0.02)

    def annulus(y):
        r = np.linalg.norm(y, axis=1)
        return ((r >= 0.5) & (r <= 1.0)).astype(float)

    ann = weighted_line_integral(annulus, d, 1.0, 200_000, 5)
    assert ann.agree(3.0)


def test_identity_requires_d_at_least_2():
    with pytest.raises(ValueError):
        weighted_line_integral(lambda y: np.ones(len(y)), 1, 1.0, 10, 0)
