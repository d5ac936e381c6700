"""Monte Carlo line processes: the Crofton formula and the foot-point integration identity.

A line is written l_{y,theta} = {y + t*theta}, with theta on S^{d-1} and
foot point y in the hyperplane theta-perp.  The kinematic measure is
dm_{d-1}(y) dH^{d-1}(theta); restricted to lines meeting B(0, R) its total
mass is d*omega_d * omega_{d-1} * R^{d-1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (
    make_rng,
    orthogonal_unit_vectors,
    sample_directions,
    sample_points_in_ball,
    spawn_rngs,
    unit_ball_volume,
)

DISCARD_WARN_FRACTION = 1e-3


@dataclass(frozen=True)
class Line:
    direction: np.ndarray
    foot: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.direction, dtype=float)
        y = np.asarray(self.foot, dtype=float)
        if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
            raise ValueError("line direction must be a unit vector")
        if abs(float(y @ theta)) > 1e-10:
            raise ValueError("foot point must be orthogonal to the direction")
        object.__setattr__(self, "direction", theta)
        object.__setattr__(self, "foot", y)

    def point(self, t):
        return self.foot + np.multiply.outer(t, self.direction)


@dataclass
class LineBundle:
    """``n`` lines stored as arrays; ``mass`` is the kinematic mass of the sampled window."""

    directions: np.ndarray
    feet: np.ndarray
    radius: float
    mass: float

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, i) -> Line:
        return Line(self.directions[i], self.feet[i])

    def chord_half_lengths(self, radius=None, centre=None) -> np.ndarray:
        """Half-length of each line's chord through B(centre, radius)."""
        radius = self.radius if radius is None else radius
        if centre is None:
            dist2 = np.sum(self.feet ** 2, axis=1)
            return np.sqrt(np.maximum(radius ** 2 - dist2, 0.0))
        w = self.feet - centre
        along = np.sum(w * self.directions, axis=1)
        dist2 = np.sum(w * w, axis=1) - along ** 2
        return np.sqrt(np.maximum(radius ** 2 - dist2, 0.0))


def kinematic_mass(d: int, R: float) -> float:
    return d * unit_ball_volume(d) * unit_ball_volume(d - 1) * R ** (d - 1)


def sample_lines_hitting_ball(d: int, R: float, n: int, rng) -> LineBundle:
    """Lines with theta uniform on S^{d-1} and y uniform in the (d-1)-ball of radius R in theta-perp."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(rng)
    theta = sample_directions(d, n, rng)
    if d == 1:
        feet = np.zeros((n, 1))
    else:
        e = orthogonal_unit_vectors(theta, rng)
        rad = R * rng.random(n) ** (1.0 / (d - 1))
        feet = e * rad[:, None]
    return LineBundle(theta, feet, float(R), kinematic_mass(d, R))


@dataclass
class CroftonEstimate:
    value: float
    stderr: float
    n_lines: int
    discarded: int
    counts: np.ndarray


def crofton_area(counter, d: int, R: float, n: int, rng) -> CroftonEstimate:
    """Estimate H^{d-1}(E) for E inside B(0, R) from intersection counts with random lines.

    ``counter(bundle)`` returns card(E cap line) for every line of the
    bundle, or ``inf`` for lines contained in E; such lines are discarded.
    Objects with a ``count_line_intersections`` method are accepted directly.
    """
    bundle = sample_lines_hitting_ball(d, R, n, rng)
    if hasattr(counter, "count_line_intersections"):
        surface = counter
        # closed chords, padded so points on the bounding sphere survive rounding
        half = bundle.chord_half_lengths() * (1.0 + 1e-9)

        def counter(b):
            return surface.count_line_intersections(b.feet, b.directions, -half, half)

    counts = np.asarray(counter(bundle), dtype=float)
    bad = ~np.isfinite(counts)
    discarded = int(bad.sum())
    if discarded > DISCARD_WARN_FRACTION * n:
        warnings.warn(f"{discarded} of {n} lines lie inside the set and were discarded",
                      RuntimeWarning, stacklevel=2)
    good = counts[~bad]
    scale = bundle.mass / (2.0 * unit_ball_volume(d - 1))
    if good.size == 0:
        return CroftonEstimate(0.0, 0.0, n, discarded, good)
    value = scale * float(np.mean(good))
    se = scale * float(np.std(good, ddof=1)) / np.sqrt(good.size) if good.size > 1 else 0.0
    return CroftonEstimate(value, se, n, discarded, good)


@dataclass
class IdentityEstimate:
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float

    @property
    def combined_stderr(self) -> float:
        return float(np.hypot(self.lhs_stderr, self.rhs_stderr))

    def agree(self, k: float = 3.0) -> bool:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) <= k * self.combined_stderr + 1e-12 * scale


def weighted_line_integral(g, d: int, R: float, n: int, rng) -> IdentityEstimate:
    """Both sides of  int_S int_{theta-perp} g dm_{d-1} dtheta = (d-1) omega_{d-1} int g/|y| dm_d.

    ``g`` maps an (n, d) array of points to n non-negative values and is
    supported in B(0, R).  The two sides use independent child streams.
    """
    if d < 2:
        raise ValueError("the integration identity requires d >= 2")
    r_lhs, r_rhs = spawn_rngs(rng, 2)
    # lhs: theta uniform, y uniform in the (d-1)-ball of radius R in theta-perp
    bundle = sample_lines_hitting_ball(d, R, n, r_lhs)
    vals = np.asarray(g(bundle.feet), dtype=float)
    mass = bundle.mass
    lhs = mass * float(vals.mean())
    lhs_se = mass * float(vals.std(ddof=1)) / np.sqrt(n)
    # rhs: importance density proportional to 1/|y| on B(0, R), i.e. |y| = R*U^(1/(d-1))
    u = sample_directions(d, n, r_rhs)
    rad = R * r_rhs.random(n) ** (1.0 / (d - 1))
    y = u * rad[:, None]
    # int_B g/|y| = E_q[g/(|y| q)], q(y) = (d-1) / (d omega_d R^{d-1} |y|)
    w = d * unit_ball_volume(d) * R ** (d - 1) / (d - 1)
    gv = np.asarray(g(y), dtype=float) * w
    factor = (d - 1) * unit_ball_volume(d - 1)
    rhs = factor * float(gv.mean())
    rhs_se = factor * float(gv.std(ddof=1)) / np.sqrt(n)
    return IdentityEstimate(lhs, lhs_se, rhs, rhs_se)


def uniform_ball_points(d, R, n, rng):
    return sample_points_in_ball(d, R, n, make_rng(rng))
