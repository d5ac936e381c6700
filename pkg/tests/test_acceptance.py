"""Acceptance criteria 1-16, one PASS/FAIL line each (see the terminal summary)."""

import math
import time

import numpy as np
import pytest

from mobile_sampling.bandlimited import synthesize
from mobile_sampling.certify import (
    CERTIFIED,
    NOT_CERTIFIED,
    RATIO_REGRESSION_FLOOR,
    Budgets,
    certify,
    sampling_ratio,
    sinc_product_example,
)
from mobile_sampling.convex import Ball, Box, Ellipsoid, SymmetricPolytope, inflate, mean_width
from mobile_sampling.geometry import (
    beurling_lower_constant,
    build_sphere_quadrature,
    spawn_rngs,
    theorem_constant,
    unit_ball_volume,
)
from mobile_sampling.integral_geometry import crofton_area, weighted_line_integral
from mobile_sampling.nodal import (
    beta_integral,
    beta_integral_closed_form,
    jensen_bound_check,
    ronkin_inequality_check,
)
from mobile_sampling.remez import (
    C_SWEEP,
    GATE_C,
    log_integral_trend,
    random_union_of_intervals,
    remez_check,
    sublevel_decay_check,
)
from mobile_sampling.surfaces import (
    HyperplaneFamily,
    SphereShell,
    UnionOfSurfaces,
    WeightedPointMeasure,
    box_window,
    check_phi0_floor,
    has_positive_measure,
    regularity_profile,
    surface_density,
)


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def anchored_corpus(n, seed, K=Ball(2, 1.0), m=6):
    return [synthesize(K, m, rng=s) for s in spawn_rngs(seed, n)]


def random_directions(n, d, seed):
    g = np.random.default_rng(seed).standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def excised_grid(eta=1e-3):
    return UnionOfSurfaces((HyperplaneFamily(np.array([1.0, 0.0]), 1.0, 0.5),
                            HyperplaneFamily(np.array([0.0, 1.0]), 1.0, 0.5)), eta)


def test_criterion_01_ball_mean_width(criterion):
    t0 = time.perf_counter()
    err = max(abs(mean_width(Ball(d, R)) - 2 * R) for d in (1, 2, 3, 4) for R in (0.5, 1.0, 3.0))
    dt = time.perf_counter() - t0
    assert criterion(1, err < 1e-8 and dt < 1.0, f"ball mean width: max error {err:.2e} (tol 1e-8), {dt:.2f} s")


def test_criterion_02_cube_mean_width(criterion):
    t0 = time.perf_counter()
    err = max(abs(mean_width(Box([1.0] * d)) - 4 * unit_ball_volume(d - 1) / unit_ball_volume(d))
              for d in (2, 3, 4))
    w3 = mean_width(Box([1.0] * 3))
    dt = time.perf_counter() - t0
    ok = err < 1e-5 and abs(w3 - 3.0) < 1e-5 and dt < 1.0
    assert criterion(2, ok, f"cube mean width: max error {err:.2e} (tol 1e-5), W(cube3) = {w3:.8f}, {dt:.2f} s")


def test_criterion_03_sphere_moment(criterion):
    t0 = time.perf_counter()
    err = 0.0
    for d in (2, 3, 4):
        q = build_sphere_quadrature(d)
        err = max(err, abs(q.integrate(np.abs(q.nodes[:, 0])) - 2 * unit_ball_volume(d - 1)))
    dt = time.perf_counter() - t0
    assert criterion(3, err < 1e-5 and dt < 1.0, f"int |theta_1| = 2 omega_(d-1): max error {err:.2e}, {dt:.2f} s")


def test_criterion_04_theorem_constant(criterion):
    a2 = theorem_constant(2)
    ratio = a2 / beurling_lower_constant(2)
    ok = abs(a2 - 3 * math.pi / 4) < 1e-12 and abs(ratio - 1.5) < 1e-12
    assert criterion(4, ok, f"A_2 = {a2:.15f} (3 pi/4 = {3 * math.pi / 4:.15f}), ratio = {ratio:.15f}")


def test_criterion_05_minkowski_additivity(criterion):
    t0 = time.perf_counter()
    hexagon = SymmetricPolytope.from_vertices(
        [[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(6)])
    shapes = [Ball(2, 1.0), Box([1.0, 0.5]), Ellipsoid((2.0, 0.5)), hexagon,
              Ball(3, 0.7), Box([0.3, 0.6, 0.9])]
    pairs = [(K, kappa) for K in shapes for kappa in (0.1, 2.5)]
    err = max(abs(mean_width(inflate(K, k)) - mean_width(K) - 2 * k) for K, k in pairs)
    dt = time.perf_counter() - t0
    ok = len(pairs) == 12 and err < 1e-7 and dt < 1.0
    assert criterion(5, ok, f"W(K + kappa B) - W(K) - 2 kappa over {len(pairs)} pairs: max {err:.2e}, {dt:.2f} s")


def test_criterion_06_crofton(criterion):
    # the enclosing ball is larger than the set: with R = 1 every line would meet the
    # unit circle exactly twice and the estimator would have zero variance
    t0 = time.perf_counter()
    R = 1.5
    circle = crofton_area(SphereShell(np.zeros(2), 1.0), 2, R, 100_000, 61)
    sphere = crofton_area(SphereShell(np.zeros(3), 1.0), 3, R, 100_000, 62)
    rel_c = abs(circle.value / (2 * math.pi) - 1)
    rel_s = abs(sphere.value / (4 * math.pi) - 1)
    ns = 6_250 * 2 ** np.arange(5)
    se, rms = [], []
    for i, n in enumerate(ns):
        reps = [crofton_area(SphereShell(np.zeros(2), 1.0), 2, R, int(n), s)
                for s in spawn_rngs(600 + i, 16)]
        se.append(np.mean([e.stderr for e in reps]))
        rms.append(np.sqrt(np.mean([(e.value - 2 * math.pi) ** 2 for e in reps])))
    slope_se = float(np.polyfit(np.log(ns), np.log(se), 1)[0])
    slope_rms = float(np.polyfit(np.log(ns), np.log(rms), 1)[0])
    dt = time.perf_counter() - t0
    ok = (rel_c < 0.02 and rel_s < 0.02 and abs(slope_se + 0.5) < 0.05
          and abs(slope_rms + 0.5) < 0.2 and dt < 30)
    assert criterion(6, ok, f"circle {circle.value:.4f} ({100 * rel_c:.2f}%), sphere {sphere.value:.4f} "
                            f"({100 * rel_s:.2f}%), slopes: stderr {slope_se:.3f}, rms error "
                            f"{slope_rms:.3f} (expect -0.5), {dt:.1f} s")


def test_criterion_07_integration_identity(criterion):
    t0 = time.perf_counter()

    def ball(y):
        return (np.linalg.norm(y, axis=1) <= 1.0).astype(float)

    def annulus(y):
        r = np.linalg.norm(y, axis=1)
        return ((r >= 0.5) & (r <= 1.0)).astype(float)

    def bump(y):
        return np.maximum(1.0 - np.sum(y ** 2, axis=1), 0.0)

    agree, worst = True, 0.0
    for d in (2, 3):
        for i, g in enumerate((ball, annulus, bump)):
            est = weighted_line_integral(g, d, 1.0, 200_000, 70 + 10 * d + i)
            agree &= est.agree(3.0)
            if g is ball:
                exact = d * unit_ball_volume(d) * unit_ball_volume(d - 1)
                worst = max(worst, abs(est.lhs / exact - 1), abs(est.rhs / exact - 1))
    dt = time.perf_counter() - t0
    ok = agree and worst < 0.02 and dt < 30
    assert criterion(7, ok, f"lhs/rhs agree within 3 se: {agree}; ball closed form max rel error "
                            f"{100 * worst:.2f}%, {dt:.1f} s")


def test_criterion_08_density_oracle(criterion):
    t0 = time.perf_counter()
    radii = np.geomspace(5.0, 50.0, 8)
    fam = HyperplaneFamily(np.array([1.0, 0.0]), 0.5, 0.0)
    union = UnionOfSurfaces((fam, HyperplaneFamily(np.array([0.0, 1.0]), 0.5, 0.0)))
    one = surface_density(fam, radii, 256, 81)
    two = surface_density(union, radii, 256, 82)
    at50 = (one.density[-1], two.density[-1])
    dt = time.perf_counter() - t0
    ok = (abs(one.estimate / 2 - 1) < 0.02 and abs(two.estimate / 4 - 1) < 0.02
          and abs(at50[0] / 2 - 1) < 0.02 and abs(at50[1] / 4 - 1) < 0.02 and dt < 10)
    assert criterion(8, ok, f"one family {one.estimate:.4f} (R=50: {at50[0]:.4f}) vs 2; "
                            f"two families {two.estimate:.4f} (R=50: {at50[1]:.4f}) vs 4, {dt:.1f} s")


def test_criterion_09_phi_floor(criterion):
    t0 = time.perf_counter()
    fam = HyperplaneFamily(np.array([1.0, 0.0]), 1.0, 0.5)
    corpus = {
        "line family": (fam, np.geomspace(1e-5, 0.5, 12)),
        "excised grid": (excised_grid(), np.geomspace(1e-5, 0.5, 12)),
        "raw grid": (excised_grid(0.0), np.geomspace(1e-5, 0.5, 12)),
        "circle": (SphereShell(np.zeros(2), 1.0), np.geomspace(1e-5, 0.5, 12)),
        "sphere": (SphereShell(np.zeros(3), 1.0), np.geomspace(1e-5, 0.5, 12)),
        "planes d=3": (HyperplaneFamily(unit([1.0, 1.0, 0.0]), 0.7, 0.1), np.geomspace(1e-5, 0.5, 12)),
        "planes d=4": (HyperplaneFamily(unit([0.0, 0.0, 0.0, 1.0]), 1.0, 0.2), np.geomspace(1e-5, 0.5, 12)),
        "discrete lines": (WeightedPointMeasure.from_surface(fam, box_window(3.0, 2), 0.01),
                           np.geomspace(0.03, 0.5, 8)),
    }
    worst, names = math.inf, []
    for name, (S, radii) in corpus.items():
        prof = regularity_profile(S, radii, 128, 91)
        v = check_phi0_floor(prof, has_positive_measure(S, box_window(2.0, S.dimension)))
        worst = min(worst, prof.phi0)
        if v.status != "pass" or prof.phi0 < 0.98:
            names.append(name)
    dt = time.perf_counter() - t0
    ok = not names and dt < 10
    assert criterion(9, ok, f"{len(corpus)} surfaces, min phi(0) = {worst:.4f} (floor 0.98), "
                            f"failing: {names or 'none'}, {dt:.1f} s")


def test_criterion_10_jensen(criterion):
    t0 = time.perf_counter()
    fs = anchored_corpus(100, 10)
    dirs = random_directions(100, 2, 10)
    violations, worst = 0, -math.inf
    for f, theta in zip(fs, dirs):
        for r in (1.0, 5.0, 10.0):
            rep = jensen_bound_check(f, np.zeros(2), theta, r)
            violations += not rep.passed
            worst = max(worst, rep.lhs - rep.rhs)
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 60
    assert criterion(10, ok, f"300 slices, {violations} violations (tol 1e-9), "
                             f"max lhs - rhs = {worst:.3f}, {dt:.1f} s")


def test_criterion_11_beta_integral(criterion):
    t0 = time.perf_counter()
    err = max(abs(beta_integral(d) - beta_integral_closed_form(d)) for d in (2, 3, 4))
    dt = time.perf_counter() - t0
    assert criterion(11, err < 1e-6 and dt < 5, f"beta integral max error {err:.2e} (tol 1e-6), {dt:.2f} s")


@pytest.mark.slow
def test_criterion_12_ronkin_inequality(criterion):
    t0 = time.perf_counter()
    fs = anchored_corpus(50, 12)
    streams = spawn_rngs(1212, 50)
    failures, line_viol, gap = 0, 0, math.inf
    for f, s in zip(fs, streams):
        rep = ronkin_inequality_check(f, 10.0, 4000, 20_000, s, k=3.0)
        failures += not rep.passed
        line_viol += rep.line_violations
        gap = min(gap, rep.rhs - rep.ronkin)
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 600
    assert criterion(12, ok, f"50 functions at R=10: {failures} violations, {line_viol} per-line "
                             f"violations, min (rhs - lhs) = {gap:.4f}, {dt:.0f} s")


def test_criterion_13_log_integral_trend(criterion):
    t0 = time.perf_counter()
    fs = anchored_corpus(20, 13)
    dirs = random_directions(20, 2, 13)
    trends = [log_integral_trend(f.slice(np.zeros(2), th)) for f, th in zip(fs, dirs)]
    bad = [i for i, t in enumerate(trends) if not t.strictly_decreasing]
    tail_bad = sum(not np.all(np.diff(t.normalised[1:]) < 0) for t in trends)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    detail = "; ".join(f"slice {i}: " + " ".join(f"{v:.4f}" for v in trends[i].normalised) for i in bad)
    assert criterion(13, ok, f"20 slices, {len(bad)} not strictly decreasing over R in {{2,4,8,16,32}} "
                             f"({tail_bad} over R >= 4){': ' + detail if detail else ''}, {dt:.1f} s")


@pytest.mark.slow
def test_criterion_14_remez(criterion):
    t0 = time.perf_counter()
    fs = anchored_corpus(100, 14)
    dirs = random_directions(100, 2, 14)
    rng = np.random.default_rng(14)
    remez_ok = decay_ok = 0
    dist = {c: 0 for c in C_SWEEP}
    dist[None] = 0
    for i, (f, th) in enumerate(zip(fs, dirs)):
        g = f.slice(np.zeros(2), th)
        R = (1.0, 4.0)[i % 2]
        F = random_union_of_intervals(R, rng)
        rem = remez_check(g, 1.0, R, F, GATE_C)
        remez_ok += rem.passed
        decay_ok += sublevel_decay_check(g, 1.0, R, GATE_C).passed
        dist[rem.minimal_C] += 1
    dt = time.perf_counter() - t0
    ok = remez_ok == 100 and decay_ok == 100 and dt < 300
    hist = ", ".join(f"C={c:g}: {n}" for c, n in dist.items() if c is not None) + f", none: {dist[None]}"
    assert criterion(14, ok, f"C=8 pass: remez form {remez_ok}/100, decay {decay_ok}/100; minimal C [{hist}], {dt:.0f} s")


def test_criterion_15_sinc_example(criterion):
    t0 = time.perf_counter()
    reps = [sinc_product_example(d, rng=15) for d in (2, 3)]
    dt = time.perf_counter() - t0
    ok = all(r.product_ge_2 and r.width_ok and r.nodal_ok for r in reps) and dt < 30
    detail = "; ".join(f"d={r.dimension}: A_d W = {r.product:.4f}, D estimate {r.density:.3f} "
                       f"vs candidates 2 / {2 * r.dimension}" for r in reps)
    assert criterion(15, ok, f"{detail}, {dt:.1f} s")


@pytest.mark.slow
def test_criterion_16_end_to_end(criterion):
    t0 = time.perf_counter()
    budgets = Budgets()
    small = certify(excised_grid(), Ball(2, 0.1), budgets, 16)
    large = certify(excised_grid(), Ball(2, 1.0), budgets, 16)
    ratio = sampling_ratio(excised_grid(), Ball(2, 0.1), math.inf, corpus_size=200, rng=16)
    dt = time.perf_counter() - t0
    ok = (small.verdict == CERTIFIED and small.margin > 1.5 and ratio.min_ratio > 0
          and ratio.min_ratio > RATIO_REGRESSION_FLOOR and large.verdict == NOT_CERTIFIED and dt < 300)
    assert criterion(16, ok, f"Ball(0.1): {small.verdict} margin {small.margin:.4f}; p=inf min ratio "
                             f"{ratio.min_ratio:.4f} (floor {RATIO_REGRESSION_FLOOR}); Ball(1): "
                             f"{large.verdict} margin {large.margin:.4f}, {dt:.0f} s")
