"""Fast closed-form checks run by ``mobile-sampling selftest``."""

from __future__ import annotations

import math

import numpy as np

from .bandlimited import BandlimitedFunction, certify_sup_norm
from .convex import Ball, Box, mean_width
from .geometry import build_sphere_quadrature, unit_ball_volume
from .integral_geometry import crofton_area
from .nodal import count_zeros, jensen_bound_check
from .remez import log_integral_direct, sublevel_closed_form_cos, sublevel_measure
from .surfaces import HyperplaneFamily, SphereShell


def _cos(freq: float = 1.0) -> BandlimitedFunction:
    return BandlimitedFunction(np.array([[freq], [-freq]]), np.array([0.5, 0.5]), Box([freq]),
                               real_valued=True)


def run_selftest() -> list[tuple[str, bool]]:
    out = []
    out.append(("ball_volume_recursion",
                all(abs(unit_ball_volume(k) - 2 * math.pi / k * unit_ball_volume(k - 2)) < 1e-12
                    for k in range(3, 12))))
    W = mean_width(Box([1.0, 1.0, 1.0]), build_sphere_quadrature(3, 4))
    out.append(("cube_mean_width", abs(W - 3.0) < 1e-6))
    out.append(("ball_mean_width", abs(mean_width(Ball(3, 0.7)) - 1.4) < 1e-9))
    slab = HyperplaneFamily(np.array([1.0, 0.0]), 1.0, 0.5)
    out.append(("slab_measure", abs(float(slab.measure_in_ball(np.zeros(2), 0.75))
                                    - 4 * math.sqrt(0.75 ** 2 - 0.25)) < 1e-12))
    est = crofton_area(SphereShell(np.zeros(2), 1.0), 2, 1.5, 40_000, 7)
    out.append(("crofton_circle", bool(abs(est.value - 2 * math.pi) < 4 * est.stderr + 1e-9)))
    g = _cos()
    out.append(("cos_zero_count", count_zeros(g, 1.0) == 4))
    out.append(("cos_sup_norm", abs(certify_sup_norm(g).bound - 1.0) < 1e-6))
    rep = jensen_bound_check(g, np.zeros(1), np.ones(1), 2.0)
    out.append(("jensen_cos", rep.passed))
    out.append(("sublevel_cos", abs(sublevel_measure(g, 1.0, 0.5)
                                    - sublevel_closed_form_cos(0.5, 1.0)) < 1e-6))
    out.append(("log_integral_cos", abs(log_integral_direct(g, 1.0) - math.log(2))
                < 1e-6))
    return out
