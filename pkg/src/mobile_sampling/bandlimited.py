"""Finite exponential sums f(x) = sum_j c_j exp(2 pi i xi_j . x) with spectrum in K.

These are the desk-scale members of PW_inf(K).  Evaluation is exact up to
rounding; sup norms carry a certificate (grid maximum plus a derivative
bound) together with a tag saying whether the bound is global or only valid
on the scanned window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .convex import Box, ConvexBody, body_from_dict, contains_frequency
from .geometry import make_rng

EXPONENT_CAP = 50.0
_CHUNK = 1 << 22


class OverflowGuardError(OverflowError):
    """Complex evaluation requested too far from the real axis."""


class AnchorError(RuntimeError):
    """Synthesis could not produce a function with |f(0)| > 1/2."""


@dataclass(frozen=True, eq=False)
class BandlimitedFunction:
    freqs: np.ndarray
    coeffs: np.ndarray
    spectrum: ConvexBody | None = None
    certified_sup: float = math.inf
    sup_method: str = "none"
    real_valued: bool = False
    period: float | None = None

    def __post_init__(self):
        xi = np.asarray(self.freqs, dtype=float)
        if xi.ndim == 1:
            xi = xi[:, None]
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if len(c) != len(xi):
            raise ValueError("need one coefficient per frequency")
        object.__setattr__(self, "freqs", xi)
        object.__setattr__(self, "coeffs", c)
        if self.spectrum is not None:
            if self.spectrum.dimension != xi.shape[1]:
                raise ValueError("spectrum dimension does not match frequencies")
            inside = np.atleast_1d(self.spectrum.contains(xi + 0.0)) if len(xi) else []
            if not np.all(inside):
                # tolerate rounding on the boundary of K
                h = self.spectrum.support_unchecked(xi / np.maximum(
                    np.linalg.norm(xi, axis=1, keepdims=True), 1e-300))
                if np.any(np.linalg.norm(xi, axis=1) > h + 1e-12):
                    raise ValueError("a frequency lies outside the spectrum K")
        if self.period is None:
            object.__setattr__(self, "period", _detect_period(xi))

    # ------------------------------------------------------------ basics
    @property
    def dimension(self) -> int:
        return self.freqs.shape[1]

    @property
    def bandwidth(self) -> float:
        """max_j |xi_j| (for a slice, the 1-D spectral radius sigma)."""
        if len(self.freqs) == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.freqs, axis=1)))

    @property
    def spectral_radius(self) -> float:
        """h_K of the declared 1-D spectrum, falling back to ``bandwidth``."""
        if self.dimension == 1 and isinstance(self.spectrum, Box):
            return float(self.spectrum.half_widths[0])
        return self.bandwidth

    @property
    def triangle_bound(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def gradient_bound(self) -> float:
        return 2.0 * math.pi * self.triangle_bound * self.bandwidth

    def hessian_bound(self) -> float:
        if len(self.freqs) == 0:
            return 0.0
        nrm2 = np.sum(self.freqs ** 2, axis=1)
        return 4.0 * math.pi ** 2 * float(np.sum(np.abs(self.coeffs) * nrm2))

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        d = self.dimension
        if d == 1 and not (x.ndim >= 2 and x.shape[-1] == 1):
            pts = x.reshape(-1, 1)
            shape = x.shape
        else:
            pts = x.reshape(-1, d)
            shape = x.shape[:-1]
        out = np.empty(len(pts), dtype=complex)
        step = max(1, _CHUNK // max(len(self.coeffs), 1))
        for i in range(0, len(pts), step):
            phase = 2.0 * math.pi * (pts[i:i + step] @ self.freqs.T)
            out[i:i + step] = np.exp(1j * phase) @ self.coeffs
        out = out.reshape(shape)
        if self.real_valued:
            out = out.real
        return out[()] if out.ndim == 0 else out

    # ------------------------------------------------------------ algebra
    def scaled(self, a: complex) -> "BandlimitedFunction":
        real = self.real_valued and np.isreal(a)
        sup = self.certified_sup * abs(a)
        return replace(self, coeffs=self.coeffs * a, certified_sup=sup, real_valued=bool(real))

    def translated(self, v) -> "BandlimitedFunction":
        """x -> f(x + v); re-phases coefficients, keeps spectrum and sup norm."""
        v = np.asarray(v, dtype=float)
        phase = np.exp(2j * math.pi * (self.freqs @ v))
        return replace(self, coeffs=self.coeffs * phase)

    def dilated(self, R: float) -> "BandlimitedFunction":
        """x -> f(R x): frequencies scale to R*xi and the spectrum to R*K."""
        spec = self.spectrum.scaled(R) if self.spectrum is not None else None
        period = self.period / R if self.period else None
        return replace(self, freqs=self.freqs * R, spectrum=spec, period=period)

    def slice(self, y, theta) -> "BandlimitedFunction":
        """g(t) = f(y + t theta) with y reprojected to the foot point in theta-perp."""
        theta = np.asarray(theta, dtype=float)
        y = np.asarray(y, dtype=float)
        y = y - (y @ theta) * theta
        nu = self.freqs @ theta
        amp = self.coeffs * np.exp(2j * math.pi * (self.freqs @ y))
        if self.spectrum is not None:
            h = float(self.spectrum.support_unchecked(theta[None, :])[0])
            if len(nu) and np.max(np.abs(nu)) > h + 1e-12:
                raise AssertionError("slice frequency outside [-h_K(theta), h_K(theta)]")
            spec = Box(np.array([max(h, 1e-300)]))
        else:
            spec = None
        g = BandlimitedFunction(nu[:, None], amp, None, self.certified_sup, self.sup_method,
                                self.real_valued, period=None)
        object.__setattr__(g, "spectrum", spec)
        return g

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "frequencies": self.freqs.tolist(),
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "spectrum": self.spectrum.to_dict() if self.spectrum is not None else None,
            "certified_sup": self.certified_sup,
            "sup_method": self.sup_method,
            "real_valued": self.real_valued,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BandlimitedFunction":
        coeffs = np.array([complex(a, b) for a, b in data["coefficients"]])
        spec = body_from_dict(data["spectrum"]) if data.get("spectrum") else None
        return cls(np.array(data["frequencies"], float), coeffs, spec,
                   float(data.get("certified_sup", math.inf)), data.get("sup_method", "none"),
                   bool(data.get("real_valued", False)))

    @classmethod
    def constant(cls, d: int, value: complex = 1.0, spectrum=None) -> "BandlimitedFunction":
        return cls(np.zeros((1, d)), np.array([value]), spectrum, abs(value), "exact",
                   bool(np.isreal(value)))


def linear_combination(a, f: BandlimitedFunction, b, g: BandlimitedFunction) -> BandlimitedFunction:
    if f.dimension != g.dimension:
        raise ValueError("dimension mismatch")
    freqs = np.vstack([f.freqs, g.freqs])
    coeffs = np.concatenate([a * f.coeffs, b * g.coeffs])
    real = f.real_valued and g.real_valued and np.isreal(a) and np.isreal(b)
    sup = abs(a) * f.certified_sup + abs(b) * g.certified_sup
    spec = f.spectrum if f.spectrum is g.spectrum else None
    return BandlimitedFunction(freqs, coeffs, spec, sup, "triangle", bool(real))


def _detect_period(freqs: np.ndarray, max_q: int = 256) -> float | None:
    """Smallest integer q <= max_q with q * xi integral, i.e. f is q-periodic in each axis."""
    if len(freqs) == 0:
        return 1.0
    for q in range(1, max_q + 1):
        scaled = freqs * q
        if np.all(np.abs(scaled - np.round(scaled)) < 1e-9):
            return float(q)
    return None


# ---------------------------------------------------------------- complex line


def evaluate_complex(g: BandlimitedFunction, z):
    """Analytic extension of a 1-D sum to z = t + i s."""
    if g.dimension != 1:
        raise ValueError("evaluate_complex needs a one-dimensional function")
    z = np.asarray(z, dtype=complex)
    h = g.bandwidth
    if h > 0 and np.max(np.abs(z.imag), initial=0.0) > EXPONENT_CAP / h:
        raise OverflowGuardError(
            f"|Im z| exceeds the cap {EXPONENT_CAP}/h = {EXPONENT_CAP / h:g}")
    nu = g.freqs[:, 0]
    vals = np.exp(2j * math.pi * np.multiply.outer(z, nu)) @ g.coeffs
    return vals[()] if vals.ndim == 0 else vals


def growth_check(g: BandlimitedFunction, z, sup: float | None = None) -> np.ndarray:
    """Boolean mask of points obeying |g(t+is)| <= sup * exp(2 pi h |s|)."""
    z = np.asarray(z, dtype=complex)
    sup = g.certified_sup if sup is None else sup
    bound = sup * np.exp(2.0 * math.pi * g.bandwidth * np.abs(z.imag))
    return np.abs(evaluate_complex(g, z)) <= bound * (1 + 1e-12) + 1e-300


# ---------------------------------------------------------------- sup norm


@dataclass
class SupCertificate:
    bound: float
    grid_max: float
    argmax: np.ndarray
    method: str
    scope: str  # "global" or "window-local"
    spacing: float


def _grid_max_periodic(f: BandlimitedFunction, n: int):
    """Exact values on the n^d grid of one period via an inverse FFT."""
    d = f.dimension
    P = f.period
    k = np.round(f.freqs * P).astype(np.int64) % n
    arr = np.zeros((n,) * d, dtype=complex)
    np.add.at(arr, tuple(k.T), f.coeffs)
    vals = np.fft.ifftn(arr) * n ** d
    mag = np.abs(vals.real) if f.real_valued else np.abs(vals)
    idx = np.unravel_index(int(np.argmax(mag)), mag.shape)
    return float(mag[idx]), np.array(idx, dtype=float) * (P / n)


def certify_sup_norm(f: BandlimitedFunction, window=None, resolution: float | None = None,
                     max_points: int = 1 << 22) -> SupCertificate:
    """Upper bound on sup|f| from a grid maximum and a derivative bound.

    With no window and a periodic f (frequencies on a rational lattice) the
    grid covers one full period, so the bound is global.  The second-order
    bound M delta^2 / 8 is then available because the maximiser is an interior
    critical point.  Otherwise the first-order bound L delta / 2 over the
    supplied window is used and the result is tagged window-local.
    """
    d = f.dimension
    sigma = max(f.bandwidth, 1e-12)
    if len(f.freqs) == 0 or f.bandwidth == 0.0:
        m = abs(complex(np.sum(f.coeffs)))
        return SupCertificate(m, m, np.zeros(d), "exact", "global", 0.0)
    if resolution is None:
        resolution = 0.005 / sigma
    S = f.triangle_bound
    if window is None and f.period is not None:
        P = f.period
        n = int(math.ceil(P / resolution))
        n = max(4, min(n, int(max_points ** (1.0 / d))))
        gmax, arg = _grid_max_periodic(f, n)
        delta = P / n * math.sqrt(d)
        first = f.gradient_bound() * delta / 2.0
        M = f.hessian_bound()
        if f.real_valued:
            second = M * delta ** 2 / 8.0
            bound = gmax + min(first, second)
        else:
            # |f|^2 has Hessian norm at most 2 (|grad f|^2 + |f| |Hess f|)
            H = 2.0 * ((2 * math.pi * S * sigma) ** 2 + S * M)
            bound = min(gmax + first, math.sqrt(gmax ** 2 + H * delta ** 2 / 8.0))
        return SupCertificate(max(min(bound, S), gmax), gmax, arg, "fft-grid", "global", P / n)
    if window is None:
        raise ValueError("non-periodic f needs an explicit window")
    lo, hi = window
    lo = np.broadcast_to(np.asarray(lo, float), (d,))
    hi = np.broadcast_to(np.asarray(hi, float), (d,))
    n = [max(2, int(math.ceil((b - a) / resolution)) + 1) for a, b in zip(lo, hi)]
    total = int(np.prod(n))
    if total > max_points:
        scale = (max_points / total) ** (1.0 / d)
        n = [max(2, int(k * scale)) for k in n]
    axes = [np.linspace(a, b, k) for a, b, k in zip(lo, hi, n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.abs(f.evaluate(grid))
    i = int(np.argmax(vals))
    spacing = max((b - a) / (k - 1) for a, b, k in zip(lo, hi, n))
    delta = spacing * math.sqrt(d)
    bound = float(vals[i]) + f.gradient_bound() * delta / 2.0
    return SupCertificate(max(min(bound, S), float(vals[i])), float(vals[i]), grid[i], "grid",
                          "window-local", spacing)


# ---------------------------------------------------------------- synthesis


def lattice_frequencies(K: ConvexBody, q: int) -> np.ndarray:
    """Points of (1/q) Z^d inside K."""
    hw = K.bounding_half_widths()
    ranges = [np.arange(-math.floor(a * q + 1e-9), math.floor(a * q + 1e-9) + 1) / q for a in hw]
    grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, K.dimension)
    return grid[np.asarray(contains_frequency(K, grid), dtype=bool)]


def _half_lattice(points: np.ndarray) -> np.ndarray:
    """One representative of each pair {xi, -xi}, xi != 0."""
    keep = []
    for p in points:
        nz = np.flatnonzero(p)
        if len(nz) and p[nz[0]] > 0:
            keep.append(p)
    return np.array(keep).reshape(-1, points.shape[1])


def synthesize(K: ConvexBody, m: int, real_valued: bool = True, anchor: bool = True, rng=0,
               anchor_mode: str = "translate", max_retries: int = 20,
               lam: float = 0.55) -> BandlimitedFunction:
    """Random member of PW_inf(K) normalised to certified sup norm 1.

    Frequencies are drawn without replacement from the lattice (1/q) Z^d cap K,
    which keeps f periodic so its sup norm can be certified globally.  For
    real functions ``m`` counts conjugate pairs.  Anchoring either
    translates f so that a grid maximiser of |f| sits at the origin
    (``"translate"``) or mixes with the constant function (``"mix"``).
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = make_rng(rng)
    hmin = float(np.min(K.bounding_half_widths()))
    q = max(1, math.ceil(4.0 / hmin))
    pool = lattice_frequencies(K, q)
    if real_valued:
        pool = _half_lattice(pool)
    while len(pool) < m:
        q *= 2
        pool = lattice_frequencies(K, q)
        if real_valued:
            pool = _half_lattice(pool)
    last = float("nan")
    for _ in range(max_retries):
        xi = pool[rng.choice(len(pool), size=m, replace=False)]
        c = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)
        if real_valued:
            xi = np.vstack([xi, -xi])
            c = np.concatenate([c, np.conj(c)]) / 2.0
        f = BandlimitedFunction(xi, c, K, real_valued=real_valued, period=float(q))
        cert = certify_sup_norm(f)
        f = replace(f.scaled(1.0 / cert.bound), certified_sup=1.0, sup_method=cert.method)
        if not anchor:
            return f
        if anchor_mode == "translate":
            g = f.translated(cert.argmax)
        elif anchor_mode == "mix":
            f0 = complex(np.sum(f.coeffs))
            rot = np.conj(f0) / abs(f0) if abs(f0) > 0 else 1.0
            if real_valued:
                rot = 1.0 if f0.real >= 0 else -1.0
            g = linear_combination((1 - lam) * rot, f, lam, BandlimitedFunction.constant(f.dimension))
            g = replace(g, spectrum=K, certified_sup=1.0, sup_method="mix", period=float(q))
        else:
            raise ValueError(f"unknown anchor mode {anchor_mode!r}")
        last = abs(complex(np.sum(g.coeffs)))
        if last > 0.5:
            return g
    raise AnchorError(f"anchoring failed after {max_retries} attempts; last |f(0)| = {last:.6f}")
