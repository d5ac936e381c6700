"""Origin-symmetric convex spectra described through their support functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .geometry import SphereQuadrature, build_sphere_quadrature, sphere_area

UNIT_TOL = 1e-9


class ApproximateMembershipError(NotImplementedError):
    """Exact frequency membership is unavailable for this body."""


def _as_directions(theta, d: int) -> tuple[np.ndarray, bool]:
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    theta = np.atleast_2d(theta)
    if theta.shape[1] != d:
        raise ValueError(f"direction dimension {theta.shape[1]} != body dimension {d}")
    norms = np.linalg.norm(theta, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError("support directions must be unit vectors (|theta| = 1 within 1e-9)")
    return theta, single


class ConvexBody:
    """Base class; concrete shapes implement :meth:`_support`.

    ``support`` takes a unit vector or an (n, d) array of unit vectors.
    """

    dimension: int

    def _support(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self, theta):
        theta, single = _as_directions(theta, self.dimension)
        h = self._support(theta)
        return float(h[0]) if single else h

    def support_unchecked(self, vectors: np.ndarray) -> np.ndarray:
        """Support function extended 1-homogeneously to arbitrary vectors."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        norms = np.linalg.norm(vectors, axis=1)
        out = np.zeros(len(vectors))
        nz = norms > 0
        if np.any(nz):
            out[nz] = norms[nz] * self._support(vectors[nz] / norms[nz, None])
        return out

    def bounding_half_widths(self) -> np.ndarray:
        return self._support(np.eye(self.dimension))

    def scaled(self, factor: float) -> "ConvexBody":
        raise NotImplementedError

    def contains(self, xi) -> np.ndarray | bool:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # closed-form extremal radius max_{x in K} |x|; None when unknown
    def _max_radius(self) -> float | None:
        return None


@dataclass(frozen=True)
class Ball(ConvexBody):
    dimension: int
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def _support(self, theta):
        return np.full(len(theta), float(self.radius))

    def scaled(self, factor):
        return Ball(self.dimension, self.radius * factor)

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(np.atleast_2d(xi), axis=1)
        out = r <= self.radius * (1 + 1e-12)
        return bool(out[0]) if xi.ndim == 1 else out

    def _max_radius(self):
        return float(self.radius)

    def to_dict(self):
        return {"type": "ball", "dimension": self.dimension, "parameters": {"radius": self.radius}}


@dataclass(frozen=True)
class Box(ConvexBody):
    """Axis-parallel box prod [-a_i, a_i]."""

    half_widths: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.half_widths))
        if not all(v > 0 for v in a):
            raise ValueError("box half-widths must be positive")
        object.__setattr__(self, "half_widths", a)

    @property
    def dimension(self):
        return len(self.half_widths)

    def _support(self, theta):
        return np.abs(theta) @ np.asarray(self.half_widths)

    def scaled(self, factor):
        return Box(tuple(a * factor for a in self.half_widths))

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        a = np.asarray(self.half_widths)
        out = np.all(np.abs(np.atleast_2d(xi)) <= a * (1 + 1e-12), axis=1)
        return bool(out[0]) if xi.ndim == 1 else out

    def _max_radius(self):
        return float(np.linalg.norm(self.half_widths))

    def to_dict(self):
        return {"type": "box", "dimension": self.dimension,
                "parameters": {"half_widths": list(self.half_widths)}}


@dataclass(frozen=True)
class Ellipsoid(ConvexBody):
    semi_axes: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in np.atleast_1d(self.semi_axes))
        if not all(v > 0 for v in s):
            raise ValueError("ellipsoid semi-axes must be positive")
        object.__setattr__(self, "semi_axes", s)

    @property
    def dimension(self):
        return len(self.semi_axes)

    def _support(self, theta):
        return np.sqrt(np.sum((theta * np.asarray(self.semi_axes)) ** 2, axis=1))

    def scaled(self, factor):
        return Ellipsoid(tuple(s * factor for s in self.semi_axes))

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        q = np.sum((np.atleast_2d(xi) / np.asarray(self.semi_axes)) ** 2, axis=1)
        out = q <= 1 + 1e-12
        return bool(out[0]) if xi.ndim == 1 else out

    def _max_radius(self):
        return float(max(self.semi_axes))

    def to_dict(self):
        return {"type": "ellipsoid", "dimension": self.dimension,
                "parameters": {"semi_axes": list(self.semi_axes)}}


@dataclass(frozen=True, eq=False)
class SymmetricPolytope(ConvexBody):
    """Convex hull of ``vertices``; must be closed under v -> -v.

    ``facet_normals`` lists the outward unit normals of all facets.  At
    construction both lists are checked against each other (and, in d >= 2,
    against the convex hull computed by qhull).
    """

    vertices: np.ndarray
    facet_normals: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        n = np.atleast_2d(np.asarray(self.facet_normals, dtype=float))
        if v.shape[1] != n.shape[1]:
            raise ValueError("vertices and facet normals have different dimensions")
        n = n / np.linalg.norm(n, axis=1, keepdims=True)
        scale = np.max(np.abs(v))
        if not _rows_subset(-v, v, 1e-9 * scale):
            raise ValueError("polytope vertex list is not closed under v -> -v")
        d = v.shape[1]
        if d == 1:
            expected = np.array([[1.0], [-1.0]])
        else:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(v)
            expected = _unique_rows(hull.equations[:, :-1], 1e-9)
            if np.min(np.abs(hull.equations[:, -1])) <= 1e-12 * scale:
                raise ValueError("polytope must contain the origin in its interior")
        if not (_rows_subset(n, expected, 1e-7) and _rows_subset(expected, n, 1e-7)):
            raise ValueError("facet normals are inconsistent with the vertex list")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "facet_normals", n)

    @classmethod
    def from_vertices(cls, vertices) -> "SymmetricPolytope":
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.shape[1] == 1:
            return cls(v, np.array([[1.0], [-1.0]]))
        from scipy.spatial import ConvexHull

        return cls(v, _unique_rows(ConvexHull(v).equations[:, :-1], 1e-9))

    @property
    def dimension(self):
        return self.vertices.shape[1]

    def _support(self, theta):
        return np.max(theta @ self.vertices.T, axis=1)

    def scaled(self, factor):
        return SymmetricPolytope(self.vertices * factor, self.facet_normals)

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        h = self._support(self.facet_normals)
        vals = np.atleast_2d(xi) @ self.facet_normals.T
        out = np.all(vals <= h * (1 + 1e-12) + 1e-15, axis=1)
        return bool(out[0]) if xi.ndim == 1 else out

    def _max_radius(self):
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def to_dict(self):
        return {"type": "polytope", "dimension": self.dimension,
                "parameters": {"vertices": self.vertices.tolist(),
                               "facet_normals": self.facet_normals.tolist()}}


@dataclass(frozen=True)
class Inflated(ConvexBody):
    """Minkowski sum of ``base`` with the closed ball of radius ``kappa``."""

    base: ConvexBody
    kappa: float

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("inflation radius kappa must be non-negative")

    @property
    def dimension(self):
        return self.base.dimension

    def _support(self, theta):
        return self.base._support(theta) + self.kappa

    def scaled(self, factor):
        return Inflated(self.base.scaled(factor), self.kappa * factor)

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        pts = np.atleast_2d(xi)
        if isinstance(self.base, Ball):
            dist = np.maximum(np.linalg.norm(pts, axis=1) - self.base.radius, 0.0)
        elif isinstance(self.base, Box):
            excess = np.maximum(np.abs(pts) - np.asarray(self.base.half_widths), 0.0)
            dist = np.linalg.norm(excess, axis=1)
        else:
            raise ApproximateMembershipError(
                f"approximate membership only: exact test not implemented for "
                f"inflated {type(self.base).__name__}"
            )
        out = dist <= self.kappa * (1 + 1e-12) + 1e-15
        return bool(out[0]) if xi.ndim == 1 else out

    def _max_radius(self):
        r = self.base._max_radius()
        return None if r is None else r + self.kappa

    def to_dict(self):
        return {"type": "inflated", "dimension": self.dimension,
                "parameters": {"kappa": self.kappa, "base": self.base.to_dict()}}


def _unique_rows(rows: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for r in rows:
        if not any(np.max(np.abs(r - k)) <= tol for k in kept):
            kept.append(r)
    return np.array(kept)


def _rows_subset(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    for r in a:
        if np.min(np.max(np.abs(b - r), axis=1)) > tol:
            return False
    return True


def support(K: ConvexBody, theta):
    return K.support(theta)


def mean_width(K: ConvexBody, q: SphereQuadrature | None = None) -> float:
    """W(K) = 2/(d omega_d) * integral of h_K over the sphere, by quadrature."""
    if q is None:
        q = build_sphere_quadrature(K.dimension)
    if q.dimension != K.dimension:
        raise ValueError(f"quadrature dimension {q.dimension} != body dimension {K.dimension}")
    return 2.0 / sphere_area(K.dimension) * q.integrate(K._support(q.nodes))


def diameter(K: ConvexBody, q: SphereQuadrature | None = None) -> float:
    """2 max_theta h_K(theta), the Euclidean diameter of a symmetric body.

    Closed forms are used where the extremal radius is known; otherwise the
    quadrature maximum is refined by local optimisation over the sphere.
    """
    if q is None:
        q = build_sphere_quadrature(K.dimension)
    if q.dimension != K.dimension:
        raise ValueError(f"quadrature dimension {q.dimension} != body dimension {K.dimension}")
    r = K._max_radius()
    if r is not None:
        return 2.0 * r
    h = K._support(q.nodes)
    start = q.nodes[int(np.argmax(h))]
    res = minimize(lambda v: -K.support_unchecked(v)[0] / max(np.linalg.norm(v), 1e-300),
                   start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    return 2.0 * max(float(h.max()), -float(res.fun))


def inflate(K: ConvexBody, kappa: float) -> Inflated:
    if kappa < 0:
        raise ValueError("inflation radius kappa must be non-negative")
    return Inflated(K, float(kappa))


def contains_frequency(K: ConvexBody, xi):
    return K.contains(xi)


def dominates(K_outer: ConvexBody, K_inner: ConvexBody, q: SphereQuadrature | None = None,
              tol: float = 1e-12) -> bool:
    """Support dominance h_inner <= h_outer on all quadrature nodes."""
    if q is None:
        q = build_sphere_quadrature(K_outer.dimension)
    return bool(np.all(K_inner._support(q.nodes) <= K_outer._support(q.nodes) + tol))


def body_from_dict(data: dict) -> ConvexBody:
    """Inverse of ``ConvexBody.to_dict``; schema ``{type, dimension, parameters}``."""
    kind = str(data["type"]).lower()
    d = int(data["dimension"])
    p = data.get("parameters", {})
    if kind == "ball":
        body = Ball(d, float(p["radius"]))
    elif kind == "box":
        body = Box(tuple(p["half_widths"]))
    elif kind == "cube":
        body = Box(tuple([float(p.get("half_width", 1.0))] * d))
    elif kind == "ellipsoid":
        body = Ellipsoid(tuple(p["semi_axes"]))
    elif kind == "polytope":
        if "facet_normals" not in p:
            raise ValueError("polytope spectrum requires both 'vertices' and 'facet_normals'")
        body = SymmetricPolytope(np.array(p["vertices"], float), np.array(p["facet_normals"], float))
    elif kind == "inflated":
        body = Inflated(body_from_dict(p["base"]), float(p["kappa"]))
    else:
        raise ValueError(f"unknown spectrum type {data['type']!r}")
    if body.dimension != d:
        raise ValueError(f"spectrum parameters give dimension {body.dimension}, declared {d}")
    return body
