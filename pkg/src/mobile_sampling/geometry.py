"""Dimension-parametric constants, sphere quadrature and seeded sampling.

All Monte Carlo code in the package draws from :func:`make_rng`, a
``numpy.random.Generator`` backed by the counter-based Philox4x64-10 bit
generator.  A given integer seed therefore produces the same stream on every
platform numpy supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

RNG_NAME = "philox4x64-10/numpy-generator/v1"
SUPPORTED_DIMENSIONS = (1, 2, 3, 4)
DEFAULT_LEVEL = 4


class DimensionError(ValueError):
    """Raised when a routine is asked for a dimension it does not support."""


def unit_ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k, pi^(k/2) / Gamma(k/2 + 1)."""
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k!r}")
    return math.exp(0.5 * k * math.log(math.pi) - math.lgamma(0.5 * k + 1.0))


def sphere_area(d: int) -> float:
    """H^{d-1} measure of the unit sphere S^{d-1}, equal to d * omega_d."""
    return d * unit_ball_volume(d)


def theorem_constant(d: int) -> float:
    """The dimensional constant (omega_d / omega_{d-1}) * 3 d^2 / (2d + 4)."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return unit_ball_volume(d) / unit_ball_volume(d - 1) * 3.0 * d * d / (2.0 * d + 4.0)


def beurling_lower_constant(d: int) -> float:
    """d * omega_d / (2 omega_{d-1}), the smallest admissible value of the theorem constant."""
    return d * unit_ball_volume(d) / (2.0 * unit_ball_volume(d - 1))


@dataclass(frozen=True)
class SphereQuadrature:
    """Antipodally symmetric quadrature rule on S^{d-1}.

    The first half of ``nodes`` is a hemisphere-like set H and the second
    half is exactly ``-H`` with identical weights, so even integrands are
    integrated identically whether evaluated at theta or -theta.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    level: int = DEFAULT_LEVEL

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def half(self) -> int:
        return len(self.weights) // 2

    def integrate(self, values) -> float:
        """Quadrature sum of ``values`` sampled at ``nodes``.

        The two antipodal halves are added pointwise before weighting, which
        makes ``integrate(g(nodes)) == integrate(g(-nodes))`` bit for bit.
        """
        values = np.asarray(values, dtype=float)
        h = self.half
        return float(np.dot(self.weights[:h], values[:h] + values[h:]))

    def integrate_function(self, g) -> float:
        return self.integrate(g(self.nodes))


def _gauss_panels(n: int, edges) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _half_sphere(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Half rule H with the full rule equal to H union -H.
    if d == 2:
        phi, w = _gauss_panels(n, [0.0, 0.5 * np.pi, np.pi])
        return np.column_stack([np.cos(phi), np.sin(phi)]), w
    inner, inner_w = _half_sphere(d - 1, n)
    chi, chi_w = _gauss_panels(n, [0.0, 0.5 * np.pi, np.pi])
    chi_w = chi_w * np.sin(chi) ** (d - 2)
    first = np.repeat(np.cos(chi), len(inner_w))
    rest = np.sin(chi)[:, None, None] * inner[None, :, :]
    nodes = np.column_stack([first, rest.reshape(-1, d - 1)])
    weights = np.outer(chi_w, inner_w).ravel()
    return nodes, weights


@lru_cache(maxsize=32)
def _cached_rule(d: int, level: int) -> SphereQuadrature:
    if d == 1:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.array([1.0, 1.0])
    else:
        half, half_w = _half_sphere(d, 8 * level)
        # renormalise each node so |theta| = 1 holds to rounding
        half = half / np.linalg.norm(half, axis=1, keepdims=True)
        nodes = np.vstack([half, -half])
        weights = np.concatenate([half_w, half_w])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphereQuadrature(d, nodes, weights, level)


def build_sphere_quadrature(d: int, level: int = DEFAULT_LEVEL) -> SphereQuadrature:
    """Product Gauss-Legendre rule on S^{d-1} in hyperspherical angles.

    Each angular coordinate is split into panels at multiples of pi/2 with
    ``8 * level`` Gauss-Legendre nodes per panel.  Support functions of
    boxes are smooth inside every panel, so their integrals converge
    spectrally.  For d = 1 the rule is the two points +-1 with unit weight.
    """
    if d not in SUPPORTED_DIMENSIONS:
        raise DimensionError(
            f"dimension out of supported range: d={d}, supported {SUPPORTED_DIMENSIONS}"
        )
    if int(level) != level or level < 1:
        raise ValueError(f"level must be a positive integer, got {level!r}")
    return _cached_rule(int(d), int(level))


def make_rng(seed) -> np.random.Generator:
    """Seeded Philox generator; ``seed`` may be an int or a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed, n: int) -> list[np.random.Generator]:
    """``n`` independent child generators, reproducible from ``seed``."""
    if isinstance(seed, np.random.Generator):
        seq = seed.bit_generator.seed_seq
    else:
        seq = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in seq.spawn(n)]


def sample_directions(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` directions uniform on S^{d-1} (normalised Gaussians)."""
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


def sample_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    return sample_directions(d, 1, rng)[0]


def sample_points_in_ball(d: int, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform in B(0, radius); radius drawn as radius * U^(1/d)."""
    u = sample_directions(d, n, rng)
    r = radius * rng.random(n) ** (1.0 / d)
    return u * r[:, None]


def sample_point_in_ball(d: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    return sample_points_in_ball(d, radius, 1, rng)[0]


def orthogonal_unit_vectors(theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vectors in the hyperplane orthogonal to each row of ``theta``."""
    n, d = theta.shape
    if d == 1:
        return np.zeros((n, 1))
    v = rng.standard_normal((n, d))
    v -= np.sum(v * theta, axis=1, keepdims=True) * theta
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / np.where(norms == 0.0, 1.0, norms)
