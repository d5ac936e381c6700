"""Candidate sampling sets and estimators for their surface measure.

Every surface exposes ``measure_in_ball`` (the H^{d-1} measure of the set
inside a ball, vectorised over centres), an exact line-intersection counter
used by the Crofton estimators, and point samplers used to place adversarial
centres.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import betainc, beta as beta_fn

from .geometry import make_rng, unit_ball_volume

PHI0_TOL = 0.02


class SubResolutionError(ValueError):
    """A ball query was made below the declared resolution floor."""


def _as_centres(x, d: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != d:
        raise ValueError(f"point dimension {x.shape[1]} != surface dimension {d}")
    return x, single


def _window_arrays(window, d: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = window
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (d,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (d,)).copy()
    return lo, hi


def box_window(half_side: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    return -np.full(d, float(half_side)), np.full(d, float(half_side))


class SurfaceSet:
    dimension: int
    resolution: float = 0.0

    def measure_in_ball(self, x, r: float):
        x, single = _as_centres(x, self.dimension)
        if r <= 0:
            raise ValueError("ball radius must be positive")
        self._check_resolution(r)
        out = self._measure(x, float(r))
        return float(out[0]) if single else out

    def _check_resolution(self, r: float) -> None:
        if self.resolution and r < 3.0 * self.resolution:
            raise SubResolutionError(
                f"radius {r:g} is below the resolution floor 3*r0 = {3 * self.resolution:g}"
            )

    def _measure(self, x: np.ndarray, r: float) -> np.ndarray:
        raise NotImplementedError

    def count_line_intersections(self, origins, directions, t_lo, t_hi) -> np.ndarray:
        """card(Gamma cap {o + t theta : t_lo <= t <= t_hi}) for each line.

        Returns floats so that ``inf`` can flag lines lying inside the set.
        """
        raise NotImplementedError

    def sample_points(self, n: int, window, rng) -> np.ndarray:
        raise NotImplementedError

    def candidate_centres(self, n: int, window, rng) -> np.ndarray:
        return self.sample_points(n, window, rng)

    def translated(self, v) -> "SurfaceSet":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class HyperplaneFamily(SurfaceSet):
    """Parallel hyperplanes {x : x.n = offset + k*spacing}, k in Z minus ``excluded``."""

    normal: np.ndarray
    spacing: float
    offset: float = 0.0
    excluded: tuple = ()

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).ravel()
        nn = np.linalg.norm(n)
        if nn == 0:
            raise ValueError("hyperplane normal must be non-zero")
        if not self.spacing > 0:
            raise ValueError("hyperplane spacing must be positive")
        n = n / nn
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "excluded", tuple(sorted(int(k) for k in self.excluded)))

    @property
    def dimension(self):
        return len(self.normal)

    @property
    def along(self) -> np.ndarray:
        """Unit tangent direction of each line (d = 2 only)."""
        return np.array([-self.normal[1], self.normal[0]])

    def plane_value(self, k) -> np.ndarray:
        return self.offset + np.asarray(k) * self.spacing

    def _excluded_mask(self, ks: np.ndarray) -> np.ndarray:
        if not self.excluded:
            return np.zeros(ks.shape, dtype=bool)
        return np.isin(ks, self.excluded)

    def _plane_range(self, s: np.ndarray, r: float):
        kmin = np.ceil((s - r - self.offset) / self.spacing).astype(np.int64)
        kmax = np.floor((s + r - self.offset) / self.spacing).astype(np.int64)
        return kmin, kmax

    def lines_in_ball(self, x: np.ndarray, r: float):
        """Plane indices and signed distances for planes meeting B(x_i, r)."""
        s = x @ self.normal
        kmin, kmax = self._plane_range(s, r)
        width = int(max(np.max(kmax - kmin + 1), 0))
        ks = kmin[:, None] + np.arange(width)[None, :]
        valid = (ks <= kmax[:, None]) & ~self._excluded_mask(ks)
        t = self.plane_value(ks) - s[:, None]
        valid &= np.abs(t) <= r
        # planes outside the ball may sit at huge distances (single-plane families)
        t = np.where(valid, t, 0.0)
        return ks, t, valid

    def _measure(self, x, r):
        d = self.dimension
        ks, t, valid = self.lines_in_ball(x, r)
        if ks.shape[1] == 0:
            return np.zeros(len(x))
        slab = np.where(valid, np.maximum(r * r - t * t, 0.0), 0.0)
        vals = unit_ball_volume(d - 1) * slab ** (0.5 * (d - 1))
        if d == 1:
            vals = valid.astype(float)
        return np.sum(np.where(valid, vals, 0.0), axis=1)

    def count_line_intersections(self, origins, directions, t_lo, t_hi):
        origins = np.atleast_2d(origins)
        directions = np.atleast_2d(directions)
        t_lo = np.broadcast_to(np.asarray(t_lo, float), (len(origins),))
        t_hi = np.broadcast_to(np.asarray(t_hi, float), (len(origins),))
        a = directions @ self.normal
        u0 = origins @ self.normal
        u1 = u0 + a * t_lo
        u2 = u0 + a * t_hi
        umin, umax = np.minimum(u1, u2), np.maximum(u1, u2)
        kmin = np.ceil((umin - self.offset) / self.spacing)
        kmax = np.floor((umax - self.offset) / self.spacing)
        counts = np.maximum(kmax - kmin + 1, 0.0)
        for k in self.excluded:
            counts -= (kmin <= k) & (k <= kmax)
        # lines parallel to the planes meet them in a null set of directions
        counts[a == 0.0] = 0.0
        return counts

    def _project_to_planes(self, pts: np.ndarray) -> np.ndarray:
        s = pts @ self.normal
        k = np.round((s - self.offset) / self.spacing)
        if self.excluded:
            bad = self._excluded_mask(k.astype(np.int64))
            # push excluded snaps to the neighbouring plane
            k = np.where(bad, k + np.where(s - self.plane_value(k) >= 0, 1, -1), k)
        return pts + (self.plane_value(k) - s)[:, None] * self.normal[None, :]

    def sample_points(self, n, window, rng):
        lo, hi = _window_arrays(window, self.dimension)
        pts = lo + (hi - lo) * rng.random((n, self.dimension))
        return self._project_to_planes(pts)

    def candidate_centres(self, n, window, rng):
        on = self.sample_points(n, window, rng)
        mid = on + 0.5 * self.spacing * self.normal[None, :]
        return np.vstack([on, mid])

    def patches(self, window):
        """Pieces of Gamma inside an axis-parallel window.

        d = 2: list of segments (p0, p1).  d >= 3: axis-aligned normals only,
        returned as (axis, value, lo, hi) rectangles.
        """
        d = self.dimension
        lo, hi = _window_arrays(window, d)
        corners = np.array(np.meshgrid(*[[a, b] for a, b in zip(lo, hi)])).reshape(d, -1).T
        proj = corners @ self.normal
        kmin = int(np.ceil((proj.min() - self.offset) / self.spacing))
        kmax = int(np.floor((proj.max() - self.offset) / self.spacing))
        ks = [k for k in range(kmin, kmax + 1) if k not in self.excluded]
        if d == 1:
            return [("point", float(self.normal[0] * self.plane_value(k))) for k in ks]
        if d == 2:
            segs = []
            for k in ks:
                seg = _clip_line_to_box(self.normal * self.plane_value(k), self.along, lo, hi)
                if seg is not None:
                    segs.append(seg)
            return segs
        axis = np.flatnonzero(np.abs(self.normal) > 1 - 1e-12)
        if len(axis) != 1:
            raise NotImplementedError("patches in d >= 3 require an axis-aligned normal")
        ax = int(axis[0])
        sign = float(np.sign(self.normal[ax]))
        return [("rect", ax, sign * self.plane_value(k), lo, hi) for k in ks]

    def translated(self, v):
        shift = float(np.asarray(v, float) @ self.normal)
        return HyperplaneFamily(self.normal, self.spacing, self.offset + shift, self.excluded)

    def to_dict(self):
        return {"type": "hyperplanes", "dimension": self.dimension,
                "parameters": {"normal": self.normal.tolist(), "spacing": self.spacing,
                               "offset": self.offset, "excluded": list(self.excluded)}}


def _clip_line_to_box(point, direction, lo, hi):
    """Liang-Barsky clip of the line point + t*direction to [lo, hi]."""
    t0, t1 = -np.inf, np.inf
    for i in range(len(point)):
        if direction[i] == 0.0:
            if not (lo[i] <= point[i] <= hi[i]):
                return None
            continue
        a = (lo[i] - point[i]) / direction[i]
        b = (hi[i] - point[i]) / direction[i]
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    if t1 <= t0:
        return None
    return point + t0 * direction, point + t1 * direction


@dataclass(frozen=True, eq=False)
class SphereShell(SurfaceSet):
    centre: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.centre, dtype=float).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "centre", c)
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    @property
    def dimension(self):
        return len(self.centre)

    def total_measure(self) -> float:
        d = self.dimension
        return d * unit_ball_volume(d) * self.radius ** (d - 1)

    def _measure(self, x, r):
        d = self.dimension
        rho = self.radius
        D = np.linalg.norm(x - self.centre, axis=1)
        if d == 1:
            return (np.abs(self.centre[0] + rho - x[:, 0]) <= r).astype(float) + (
                np.abs(self.centre[0] - rho - x[:, 0]) <= r
            ).astype(float)
        out = np.zeros(len(x))
        at_centre = D == 0.0
        out[at_centre] = np.where(r >= rho, self.total_measure(), 0.0)
        D = D[~at_centre]
        c0 = (rho * rho + D * D - r * r) / (2.0 * rho * D)
        alpha = np.arccos(np.clip(c0, -1.0, 1.0))
        out[~at_centre] = _cap_area(d, rho, alpha)
        return out

    def count_line_intersections(self, origins, directions, t_lo, t_hi):
        origins = np.atleast_2d(origins)
        directions = np.atleast_2d(directions)
        t_lo = np.broadcast_to(np.asarray(t_lo, float), (len(origins),))
        t_hi = np.broadcast_to(np.asarray(t_hi, float), (len(origins),))
        w = origins - self.centre
        b = np.sum(w * directions, axis=1)
        c = np.sum(w * w, axis=1) - self.radius ** 2
        disc = b * b - c
        counts = np.zeros(len(origins))
        pos = disc > 0
        sq = np.sqrt(np.where(pos, disc, 0.0))
        for root in (-b - sq, -b + sq):
            counts += pos & (root >= t_lo) & (root <= t_hi)
        tangent = disc == 0
        counts += tangent & (-b >= t_lo) & (-b <= t_hi)
        return counts

    def sample_points(self, n, window, rng):
        from .geometry import sample_directions

        return self.centre + self.radius * sample_directions(self.dimension, n, rng)

    def candidate_centres(self, n, window, rng):
        on = self.sample_points(n, window, rng)
        return np.vstack([on, self.centre[None, :]])

    def translated(self, v):
        return SphereShell(self.centre + np.asarray(v, float), self.radius)

    def to_dict(self):
        return {"type": "sphere", "dimension": self.dimension,
                "parameters": {"centre": self.centre.tolist(), "radius": self.radius}}


def _cap_area(d: int, rho: float, alpha: np.ndarray) -> np.ndarray:
    """H^{d-1} area of the cap of polar angle ``alpha`` on a sphere of radius rho."""
    m = d - 2
    a = 0.5 * (m + 1)
    full = beta_fn(a, 0.5)
    s2 = np.sin(alpha) ** 2
    partial = 0.5 * full * betainc(a, 0.5, s2)
    integral = np.where(alpha <= 0.5 * np.pi, partial, full - partial)
    return (d - 1) * unit_ball_volume(d - 1) * rho ** (d - 1) * integral


@dataclass(frozen=True, eq=False)
class UnionOfSurfaces(SurfaceSet):
    """Union of member surfaces whose pairwise overlaps are H^{d-1}-null.

    With ``excision_radius = eta > 0`` (d = 2, line families only) every
    line loses the points within distance eta, measured along the line, of
    each crossing with a line of another family.  This removes the
    concentration of measure at crossings, so the union becomes phi-regular
    with phi(0) = 1 at the cost of density 2*eta per crossing and line.
    """

    members: tuple
    excision_radius: float = 0.0

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("union must have at least one member")
        d = members[0].dimension
        if any(m.dimension != d for m in members):
            raise ValueError("union members must share a dimension")
        object.__setattr__(self, "members", members)
        if self.excision_radius < 0:
            raise ValueError("excision radius must be non-negative")
        if self.excision_radius > 0:
            if d != 2 or not all(isinstance(m, HyperplaneFamily) for m in members):
                raise NotImplementedError("crossing excision requires d = 2 line families")
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                if (isinstance(a, HyperplaneFamily) and isinstance(b, HyperplaneFamily)
                        and abs(abs(a.normal @ b.normal) - 1.0) < 1e-12):
                    raise ValueError("union members must not be parallel line families "
                                     "(overlaps would not be null sets)")

    @property
    def dimension(self):
        return self.members[0].dimension

    @property
    def resolution(self):
        return max(getattr(m, "resolution", 0.0) for m in self.members)

    def _measure(self, x, r):
        if self.excision_radius > 0:
            # lines per ball times crossings per line bounds the work per centre
            per = max(1.0, sum(2 * r / m.spacing + 1 for m in self.members) ** 2)
            step = max(1, int(2_000_000 // per))
            return np.concatenate([self._excised_measure(x[i:i + step], r)
                                   for i in range(0, len(x), step)])
        return sum(m._measure(x, r) for m in self.members)

    def _crossing_offsets(self, i: int, base: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        """Along-line positions of crossings on lines of family ``i``.

        ``base`` holds one point per line (rows), positions are measured from
        it along ``members[i].along`` and restricted to [lo, hi] per row.
        """
        fam = self.members[i]
        u = fam.along
        cols = []
        for j, other in enumerate(self.members):
            if j == i:
                continue
            a = float(u @ other.normal)
            if a == 0.0:
                continue
            v0 = base @ other.normal
            # s = (other.value(m) - v0) / a  in [lo, hi]
            m_a = (v0 + a * lo - other.offset) / other.spacing
            m_b = (v0 + a * hi - other.offset) / other.spacing
            mmin = np.ceil(np.minimum(m_a, m_b)).astype(np.int64)
            mmax = np.floor(np.maximum(m_a, m_b)).astype(np.int64)
            width = int(max(np.max(mmax - mmin + 1, initial=0), 0))
            if width == 0:
                continue
            ms = mmin[:, None] + np.arange(width)[None, :]
            ok = (ms <= mmax[:, None]) & ~other._excluded_mask(ms)
            s = (other.plane_value(ms) - v0[:, None]) / a
            cols.append(np.where(ok, s, np.inf))
        if not cols:
            return np.full((len(base), 0), np.inf)
        return np.concatenate(cols, axis=1)

    def _excised_measure(self, x: np.ndarray, r: float) -> np.ndarray:
        eta = self.excision_radius
        total = np.zeros(len(x))
        for i, fam in enumerate(self.members):
            ks, t, valid = fam.lines_in_ball(x, r)
            rows, cols = np.nonzero(valid)
            if rows.size == 0:
                continue
            tt = t[rows, cols]
            half = np.sqrt(np.maximum(r * r - tt * tt, 0.0))
            base = x[rows] + tt[:, None] * fam.normal[None, :]
            s = self._crossing_offsets(i, base, -half - eta, half + eta)
            kept = 2.0 * half - _union_length(s, eta, half)
            total += np.bincount(rows, weights=kept, minlength=len(x))
        return total

    def excised_mask(self, i: int, pts: np.ndarray) -> np.ndarray:
        """True where points lying on lines of family ``i`` fall in an excised gap."""
        if self.excision_radius == 0:
            return np.zeros(len(pts), dtype=bool)
        eta = self.excision_radius
        u = self.members[i].along
        hit = np.zeros(len(pts), dtype=bool)
        for j, other in enumerate(self.members):
            if j == i:
                continue
            a = abs(float(u @ other.normal))
            if a == 0.0:
                continue
            v = pts @ other.normal
            m0 = np.round((v - other.offset) / other.spacing).astype(np.int64)
            best = np.full(len(pts), np.inf)
            for dm in (-1, 0, 1):
                m = m0 + dm
                dist = np.abs(v - other.plane_value(m)) / a
                dist = np.where(other._excluded_mask(m), np.inf, dist)
                best = np.minimum(best, dist)
            hit |= best < eta
        return hit

    def count_line_intersections(self, origins, directions, t_lo, t_hi):
        if self.excision_radius == 0:
            return sum(m.count_line_intersections(origins, directions, t_lo, t_hi)
                       for m in self.members)
        origins = np.atleast_2d(origins)
        directions = np.atleast_2d(directions)
        t_lo = np.broadcast_to(np.asarray(t_lo, float), (len(origins),))
        t_hi = np.broadcast_to(np.asarray(t_hi, float), (len(origins),))
        counts = np.zeros(len(origins))
        for i, fam in enumerate(self.members):
            a = directions @ fam.normal
            u0 = origins @ fam.normal
            safe = np.where(a == 0.0, 1.0, a)
            ka = (u0 + a * t_lo - fam.offset) / fam.spacing
            kb = (u0 + a * t_hi - fam.offset) / fam.spacing
            kmin = np.ceil(np.minimum(ka, kb)).astype(np.int64)
            kmax = np.floor(np.maximum(ka, kb)).astype(np.int64)
            width = int(max(np.max(kmax - kmin + 1, initial=0), 0))
            if width == 0:
                continue
            ks = kmin[:, None] + np.arange(width)[None, :]
            ok = (ks <= kmax[:, None]) & ~fam._excluded_mask(ks) & (a != 0.0)[:, None]
            tt = (fam.plane_value(ks) - u0[:, None]) / safe[:, None]
            pts = origins[:, None, :] + tt[..., None] * directions[:, None, :]
            gap = self.excised_mask(i, pts.reshape(-1, 2)).reshape(ok.shape)
            counts += np.sum(ok & ~gap, axis=1)
        return counts

    def sample_points(self, n, window, rng):
        out = []
        per = max(1, n // len(self.members))
        for i, m in enumerate(self.members):
            pts = m.sample_points(per, window, rng)
            if self.excision_radius > 0:
                pts = pts[~self.excised_mask(i, pts)]
            out.append(pts)
        return np.vstack(out)

    def candidate_centres(self, n, window, rng):
        out = [m.candidate_centres(max(1, n // len(self.members)), window, rng)
               for m in self.members]
        lines = [m for m in self.members if isinstance(m, HyperplaneFamily)]
        if self.dimension == 2 and len(lines) >= 2:
            out.append(self._crossing_centres(lines, n, window, rng))
        return np.vstack(out)

    def _crossing_centres(self, lines, n, window, rng):
        # crossings, the ends of the excised gaps, and the points between arms
        fam0, fam1 = lines[0], lines[1]
        base = fam0.sample_points(n, window, rng)
        v = base @ fam1.normal
        m = np.round((v - fam1.offset) / fam1.spacing)
        a = float(fam0.along @ fam1.normal)
        if a == 0.0:
            return base
        cross = base + ((fam1.plane_value(m) - v) / a)[:, None] * fam0.along[None, :]
        eta = self.excision_radius
        if eta == 0:
            return cross
        u0, u1 = fam0.along, fam1.along
        shifts = [eta * u0, eta * u1, 0.5 * eta * (u0 + u1), 0.5 * eta * (u0 - u1)]
        return np.vstack([cross] + [cross + s for s in shifts])

    def patches(self, window):
        out = []
        eta = self.excision_radius
        for i, m in enumerate(self.members):
            segs = m.patches(window)
            if eta == 0 or self.dimension != 2:
                out.extend(segs)
                continue
            for p0, p1 in segs:
                length = float(np.linalg.norm(p1 - p0))
                u = (p1 - p0) / length
                along = self.members[i].along
                base = p0[None, :]
                sgn = float(u @ along)
                s = self._crossing_offsets(i, base, np.array([-eta]), np.array([length + eta]))
                s = np.sort(sgn * s[np.isfinite(s)])
                cur = 0.0
                for c in s:
                    if c - eta > cur:
                        out.append((p0 + cur * u, p0 + min(c - eta, length) * u))
                    cur = max(cur, c + eta)
                if cur < length:
                    out.append((p0 + cur * u, p1))
        return out

    def translated(self, v):
        return UnionOfSurfaces(tuple(m.translated(v) for m in self.members), self.excision_radius)

    def to_dict(self):
        return {"type": "union", "dimension": self.dimension,
                "parameters": {"excision_radius": self.excision_radius},
                "children": [m.to_dict() for m in self.members]}


def _union_length(s: np.ndarray, eta: float, half: np.ndarray) -> np.ndarray:
    """Length of [-half, half] covered by the intervals [s - eta, s + eta], per row."""
    if s.shape[1] == 0:
        return np.zeros(len(s))
    s = np.sort(s, axis=1)
    half = half[:, None]
    starts = np.clip(s - eta, -half, half)
    ends = np.clip(s + eta, -half, half)
    prev = np.maximum.accumulate(np.concatenate([-half, ends[:, :-1]], axis=1), axis=1)
    return np.sum(np.maximum(ends - np.maximum(starts, prev), 0.0), axis=1)


@dataclass(frozen=True, eq=False)
class WeightedPointMeasure(SurfaceSet):
    """Discrete approximation sum_j w_j delta_{x_j} of H^{d-1} restricted to Gamma.

    ``resolution`` is the declared scale r0; ball queries below 3*r0 raise
    :class:`SubResolutionError`.
    """

    points: np.ndarray
    weights: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(p) != len(w):
            raise ValueError("points and weights must have equal length")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if not self.resolution > 0:
            raise ValueError("a positive resolution scale r0 must be declared")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)
        from scipy.spatial import cKDTree

        object.__setattr__(self, "_tree", cKDTree(p) if len(p) else None)

    @property
    def dimension(self):
        return self.points.shape[1]

    def _measure(self, x, r):
        if self._tree is None:
            return np.zeros(len(x))
        idx = self._tree.query_ball_point(x, r)
        return np.array([self.weights[i].sum() if len(i) else 0.0 for i in idx])

    def count_line_intersections(self, origins, directions, t_lo, t_hi):
        raise NotImplementedError("a point measure has no exact line-intersection counter")

    def sample_points(self, n, window, rng):
        if len(self.points) == 0:
            return np.zeros((0, self.dimension))
        p = self.weights / self.weights.sum()
        return self.points[rng.choice(len(self.points), size=n, p=p)]

    def patches(self, window):
        lo, hi = _window_arrays(window, self.dimension)
        inside = np.all((self.points >= lo) & (self.points <= hi), axis=1)
        return [("points", self.points[inside], self.weights[inside])]

    def translated(self, v):
        return WeightedPointMeasure(self.points + np.asarray(v, float), self.weights,
                                    self.resolution)

    def to_dict(self):
        return {"type": "points", "dimension": self.dimension,
                "parameters": {"resolution": self.resolution,
                               "points": self.points.tolist(),
                               "weights": self.weights.tolist()}}

    @classmethod
    def from_file(cls, path, resolution: float, dimension: int | None = None):
        """Read ``x_1 ... x_d weight`` rows separated by whitespace or commas."""
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].replace(",", " ").strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: cannot parse point row") from exc
        if not rows:
            raise ValueError(f"{path}: no points")
        arr = np.array(rows)
        if dimension is not None and arr.shape[1] != dimension + 1:
            raise ValueError(f"{path}: expected {dimension + 1} columns, got {arr.shape[1]}")
        return cls(arr[:, :-1], arr[:, -1], resolution)

    @classmethod
    def from_surface(cls, surface: SurfaceSet, window, resolution: float,
                     oversample: int = 8) -> "WeightedPointMeasure":
        """Cell-centred discretisation of a closed-form surface at spacing r0/oversample."""
        h = resolution / oversample
        d = surface.dimension
        if isinstance(surface, UnionOfSurfaces):
            parts = [cls.from_surface(m, window, resolution, oversample) for m in surface.members]
            return cls(np.vstack([p.points for p in parts]),
                       np.concatenate([p.weights for p in parts]), resolution)
        if isinstance(surface, SphereShell):
            rho = surface.radius
            if d == 2:
                n = int(np.ceil(2 * np.pi * rho / h))
                ang = 2 * np.pi * (np.arange(n) + 0.5) / n
                pts = surface.centre + rho * np.column_stack([np.cos(ang), np.sin(ang)])
                return cls(pts, np.full(n, 2 * np.pi * rho / n), resolution)
            if d == 3:
                n = int(np.ceil(4 * np.pi * rho ** 2 / h ** 2))
                i = np.arange(n) + 0.5
                z = 1 - 2 * i / n
                phi = np.pi * (1 + 5 ** 0.5) * i
                rr = np.sqrt(1 - z * z)
                pts = surface.centre + rho * np.column_stack([rr * np.cos(phi), rr * np.sin(phi), z])
                return cls(pts, np.full(n, 4 * np.pi * rho ** 2 / n), resolution)
        if isinstance(surface, HyperplaneFamily):
            pts, wts = [], []
            for patch in surface.patches(window):
                if d == 2:
                    p0, p1 = patch
                    length = float(np.linalg.norm(p1 - p0))
                    n = max(1, int(np.ceil(length / h)))
                    tt = (np.arange(n) + 0.5) / n
                    pts.append(p0 + tt[:, None] * (p1 - p0))
                    wts.append(np.full(n, length / n))
                elif patch[0] == "rect":
                    _, ax, val, lo, hi = patch
                    others = [k for k in range(d) if k != ax]
                    axes = []
                    cell = 1.0
                    for k in others:
                        n = max(1, int(np.ceil((hi[k] - lo[k]) / h)))
                        axes.append(lo[k] + (np.arange(n) + 0.5) * (hi[k] - lo[k]) / n)
                        cell *= (hi[k] - lo[k]) / n
                    grid = np.meshgrid(*axes, indexing="ij")
                    block = np.empty((grid[0].size, d))
                    block[:, ax] = val
                    for k, g in zip(others, grid):
                        block[:, k] = g.ravel()
                    pts.append(block)
                    wts.append(np.full(len(block), cell))
            if not pts:
                return cls(np.zeros((0, d)), np.zeros(0), resolution)
            return cls(np.vstack(pts), np.concatenate(wts), resolution)
        raise NotImplementedError(f"cannot discretise {type(surface).__name__}")


def surface_from_dict(data: dict, base_dir: Path | None = None) -> SurfaceSet:
    """Inverse of ``SurfaceSet.to_dict``; schema ``{type, dimension, parameters, children}``."""
    kind = str(data["type"]).lower()
    p = data.get("parameters", {})
    if kind in ("hyperplanes", "hyperplane_family"):
        return HyperplaneFamily(np.array(p["normal"], float), float(p["spacing"]),
                                float(p.get("offset", 0.0)), tuple(p.get("excluded", ())))
    if kind == "hyperplane":
        # a single plane: spacing so large that only k = 0 ever meets a query ball
        return HyperplaneFamily(np.array(p["normal"], float), 1e300, float(p.get("offset", 0.0)))
    if kind in ("sphere", "sphere_shell"):
        centre = p["center"] if "center" in p and "centre" not in p else p["centre"]
        return SphereShell(np.array(centre, float), float(p["radius"]))
    if kind == "union":
        children = [surface_from_dict(c, base_dir) for c in data.get("children", [])]
        return UnionOfSurfaces(tuple(children), float(p.get("excision_radius", 0.0)))
    if kind == "points":
        res = float(p["resolution"])
        if "points_file" in p:
            path = Path(p["points_file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return WeightedPointMeasure.from_file(path, res, data.get("dimension"))
        return WeightedPointMeasure(np.array(p["points"], float), np.array(p["weights"], float), res)
    raise ValueError(f"unknown surface type {data['type']!r}")


def single_hyperplane(normal, offset: float = 0.0) -> HyperplaneFamily:
    return HyperplaneFamily(np.asarray(normal, float), 1e300, offset)


# ---------------------------------------------------------------- estimators


@dataclass
class RegularityProfile:
    radii: np.ndarray
    values: np.ndarray
    phi0: float
    centres_used: int
    empty: bool = False
    admissible: np.ndarray | None = None

    def rows(self):
        return [(float(r), float(v)) for r, v in zip(self.radii, self.values)]


def _centre_sample(surface, n, window, rng):
    lo, hi = _window_arrays(window, surface.dimension)
    uniform = lo + (hi - lo) * rng.random((n, surface.dimension))
    try:
        special = surface.candidate_centres(n, window, rng)
    except NotImplementedError:
        special = np.zeros((0, surface.dimension))
    return np.vstack([uniform, special])


def regularity_profile(surface: SurfaceSet, radii, n_centres: int = 256, rng=0,
                       window=None, tol: float = PHI0_TOL) -> RegularityProfile:
    """Lower estimate of phi(r) = sup_x mu(B(x, r)) / (omega_{d-1} r^{d-1}).

    Centres are drawn uniformly in ``window`` and adversarially on the set.
    phi(0) is the linear extrapolation through the three smallest admissible
    radii, floored at their maximum minus ``tol``.
    """
    rng = make_rng(rng)
    d = surface.dimension
    radii = np.sort(np.asarray(radii, dtype=float))
    if np.any((radii <= 0) | (radii >= 1)):
        raise ValueError("profile radii must lie in (0, 1)")
    if window is None:
        window = box_window(2.0, d)
    admissible = radii >= 3.0 * surface.resolution if surface.resolution else np.ones(len(radii), bool)
    if not np.any(admissible):
        raise SubResolutionError("no profile radius is above the resolution floor")
    centres = _centre_sample(surface, n_centres, window, rng)
    values = np.full(len(radii), np.nan)
    norm = unit_ball_volume(d - 1)
    for i, r in enumerate(radii):
        if not admissible[i]:
            continue
        mu = surface.measure_in_ball(centres, r)
        values[i] = np.max(mu) / (norm * r ** (d - 1))
    ok = np.flatnonzero(admissible)
    empty = bool(np.nanmax(values) == 0.0)
    if empty:
        warnings.warn("surface has no measure near the sampled centres; profile is zero",
                      RuntimeWarning, stacklevel=2)
    small = ok[:3]
    if len(small) >= 2:
        slope, intercept = np.polyfit(radii[small], values[small], 1)
    else:
        intercept = values[small[0]]
    phi0 = float(max(intercept, np.max(values[small]) - tol))
    return RegularityProfile(radii, values, phi0, len(centres), empty, admissible)


@dataclass
class Phi0Verdict:
    status: str  # "pass", "fail" or "skipped"
    phi0: float
    tol: float
    message: str

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def check_phi0_floor(profile: RegularityProfile, positive_measure: bool,
                     tol: float = PHI0_TOL) -> Phi0Verdict:
    """A phi-regular set of positive measure must have phi(0) >= 1."""
    if not positive_measure:
        return Phi0Verdict("skipped", profile.phi0, tol,
                           "set has no positive measure; floor phi(0) >= 1 does not apply")
    if profile.phi0 >= 1.0 - tol:
        return Phi0Verdict("pass", profile.phi0, tol, f"phi(0) = {profile.phi0:.6f} >= 1 - {tol}")
    return Phi0Verdict("fail", profile.phi0, tol,
                       f"phi(0) = {profile.phi0:.6f} < 1 - {tol}: inconsistent surface "
                       f"construction or under-sampled profile")


@dataclass
class DensityReport:
    radii: np.ndarray
    density: np.ndarray
    estimate: float
    slope: float
    fit_stderr: float
    uncertainty: float
    centres_used: int
    note: str = ("upper estimate of D^-: the infimum over centres is taken over a finite "
                 "sample and the liminf is replaced by a fit D + c/R on the largest radii")

    def rows(self):
        return [(float(r), float(v)) for r, v in zip(self.radii, self.density)]


def surface_density(surface: SurfaceSet, radii, n_centres: int = 256, rng=0,
                    window=None) -> DensityReport:
    """Estimate D^-(Gamma) = liminf_R inf_x mu(B(x, R)) / (omega_d R^d)."""
    rng = make_rng(rng)
    d = surface.dimension
    radii = np.sort(np.asarray(radii, dtype=float))
    if window is None:
        window = box_window(2.0 * radii[-1], d)
    centres = _centre_sample(surface, n_centres, window, rng)
    vol = unit_ball_volume(d)
    dens = np.array([np.min(surface.measure_in_ball(centres, R)) / (vol * R ** d) for R in radii])
    top = slice(len(radii) // 2, None) if len(radii) >= 4 else slice(0, None)
    Rt, Dt = radii[top], dens[top]
    if len(Rt) >= 2:
        A = np.column_stack([np.ones_like(Rt), 1.0 / Rt])
        coef, *_ = np.linalg.lstsq(A, Dt, rcond=None)
        D, c = float(coef[0]), float(coef[1])
        resid = Dt - A @ coef
        dof = len(Rt) - 2
        if dof > 0:
            cov = np.linalg.inv(A.T @ A) * float(resid @ resid) / dof
            se = float(np.sqrt(max(cov[0, 0], 0.0)))
        else:
            se = 0.0
    else:
        D, c, se = float(Dt[-1]), 0.0, 0.0
    D = max(D, 0.0)
    unc = se + abs(D - float(dens[-1]))
    return DensityReport(radii, dens, D, c, se, unc, len(centres))


def has_positive_measure(surface: SurfaceSet, window) -> bool:
    lo, hi = _window_arrays(window, surface.dimension)
    centre = 0.5 * (lo + hi)
    r = 0.5 * float(np.linalg.norm(hi - lo))
    if surface.resolution:
        r = max(r, 3 * surface.resolution)
    return float(surface.measure_in_ball(centre, r)) > 0.0
