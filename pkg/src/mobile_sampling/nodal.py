"""Zeros of real 1-D slices and the nodal-set estimates built from them.

Zero finding is batched over many lines at once: every line gets the same
number of scan points on its own interval, sign changes are refined by
vectorised bisection, and sign-preserving dips are refined by golden-section
search to catch tangential (even order) zeros, which count twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bandlimited import BandlimitedFunction
from .convex import mean_width
from .geometry import make_rng, spawn_rngs, theorem_constant, unit_ball_volume
from .integral_geometry import kinematic_mass, sample_lines_hitting_ball

ZERO_TOL = 1e-12
TANGENT_TOL = 1e-10
DEGENERATE_TOL = 1e-13
LOG_CLIP = 50.0
_GOLD = (math.sqrt(5.0) - 1.0) / 2.0
_BLOCK = 1 << 21


class DegenerateSliceError(ValueError):
    """The slice vanishes identically on the requested interval."""


@dataclass
class ZeroSet:
    """Zeros of a batch of slices: ``rows`` index the line, ``positions`` the zero."""

    rows: np.ndarray
    positions: np.ndarray
    multiplicity: np.ndarray
    degenerate: np.ndarray

    def counts(self, n_lines: int) -> np.ndarray:
        return np.bincount(self.rows, weights=self.multiplicity, minlength=n_lines)

    def for_row(self, i: int) -> np.ndarray:
        """Zeros of line ``i`` repeated by multiplicity, sorted."""
        sel = self.rows == i
        return np.sort(np.repeat(self.positions[sel], self.multiplicity[sel].astype(int)))


def _bisect(evaluate, rows, a, b, fa, tol):
    a, b, fa = a.copy(), b.copy(), fa.copy()
    for _ in range(200):
        if a.size == 0 or np.max(b - a) <= tol:
            break
        mid = 0.5 * (a + b)
        fm = evaluate(rows, mid[:, None])[:, 0]
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
    return 0.5 * (a + b)


def _golden_min(evaluate, rows, a, b, sign, iters=80):
    """Minimise sign * g on [a, b] per row."""
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc = sign * evaluate(rows, c[:, None])[:, 0]
    fd = sign * evaluate(rows, d[:, None])[:, 0]
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        d_new = np.where(left, c, a + _GOLD * (b - a))
        c_new = np.where(left, b - _GOLD * (b - a), d)
        fd_new = np.where(left, fc, np.nan)
        fc_new = np.where(left, np.nan, fd)
        need_c = left
        need_d = ~left
        if np.any(need_c):
            fc_new[need_c] = sign[need_c] * evaluate(rows[need_c], c_new[need_c][:, None])[:, 0]
        if np.any(need_d):
            fd_new[need_d] = sign[need_d] * evaluate(rows[need_d], d_new[need_d][:, None])[:, 0]
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
    t = 0.5 * (a + b)
    return t, sign * evaluate(rows, t[:, None])[:, 0]


def find_zeros_batch(evaluate, lo, hi, step: float, tol: float = ZERO_TOL,
                     tangent_tol: float = TANGENT_TOL) -> ZeroSet:
    """Zeros of ``evaluate(rows, T)`` on [lo_i, hi_i] for every row i.

    ``evaluate(rows, T)`` returns real values of shape ``T.shape`` for the
    lines listed in ``rows`` at parameters ``T`` (one row of T per line).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    length = np.maximum(hi - lo, 0.0)
    k = int(math.ceil(float(np.max(length, initial=0.0)) / step)) + 1
    k = max(k, 3)
    frac = np.linspace(0.0, 1.0, k)
    rows_all = np.arange(n)
    grid = lo[:, None] + length[:, None] * frac[None, :]
    vals = evaluate(rows_all, grid)
    degenerate = np.max(np.abs(vals), axis=1) <= DEGENERATE_TOL
    sg = np.where(vals >= 0.0, 1.0, -1.0)
    out_rows, out_pos, out_mult = [], [], []
    # simple zeros: sign changes between neighbouring scan points
    change = (sg[:, :-1] != sg[:, 1:]) & ~degenerate[:, None]
    r, j = np.nonzero(change)
    if r.size:
        z = _bisect(evaluate, r, grid[r, j], grid[r, j + 1], vals[r, j], tol)
        out_rows.append(r)
        out_pos.append(z)
        out_mult.append(np.ones(r.size))
    # sign-preserving dips towards zero: tangential zeros or close pairs
    if k >= 3:
        s = sg[:, 1:-1]
        a = s * vals[:, :-2]
        b = s * vals[:, 1:-1]
        c = s * vals[:, 2:]
        dip = (sg[:, :-2] == s) & (sg[:, 2:] == s) & (b <= a) & (b <= c) & ~degenerate[:, None]
        # only dips that could reach zero within one scan cell are worth refining
        dip &= b <= 0.25 * np.maximum(np.abs(a), np.abs(c)) + tangent_tol
        r, j = np.nonzero(dip)
        if r.size:
            sign = s[r, j]
            t, v = _golden_min(evaluate, r, grid[r, j], grid[r, j + 2], sign)
            hit = v <= tangent_tol
            double = hit & (v >= -tangent_tol)
            pair = hit & (v < -tangent_tol)
            if np.any(double):
                out_rows.append(r[double])
                out_pos.append(t[double])
                out_mult.append(np.full(int(double.sum()), 2.0))
            if np.any(pair):
                rp, tp = r[pair], t[pair]
                fa = evaluate(rp, grid[rp, j[pair]][:, None])[:, 0]
                z1 = _bisect(evaluate, rp, grid[rp, j[pair]], tp, fa, tol)
                fb = evaluate(rp, tp[:, None])[:, 0]
                z2 = _bisect(evaluate, rp, tp, grid[rp, j[pair] + 2], fb, tol)
                out_rows += [rp, rp]
                out_pos += [z1, z2]
                out_mult += [np.ones(rp.size), np.ones(rp.size)]
    if out_rows:
        rows = np.concatenate(out_rows)
        pos = np.concatenate(out_pos)
        mult = np.concatenate(out_mult)
        order = np.lexsort((pos, rows))
        rows, pos, mult = rows[order], pos[order], mult[order]
        # drop duplicates produced by a zero landing exactly on a scan point
        keep = np.ones(len(rows), bool)
        keep[1:] = ~((rows[1:] == rows[:-1]) & (np.abs(pos[1:] - pos[:-1]) <= 10 * tol)
                     & (mult[1:] == 2.0))
        rows, pos, mult = rows[keep], pos[keep], mult[keep]
    else:
        rows, pos, mult = np.zeros(0, int), np.zeros(0), np.zeros(0)
    return ZeroSet(rows, pos, mult, degenerate)


class SliceBatch:
    """Many 1-D slices of one real function: g_i(t) = Re sum_j A_ij exp(2 pi i nu_ij t)."""

    def __init__(self, f: BandlimitedFunction, bases, directions):
        if not f.real_valued:
            raise ValueError("zero counting needs a real-valued function")
        bases = np.atleast_2d(np.asarray(bases, float))
        directions = np.atleast_2d(np.asarray(directions, float))
        self.amp = f.coeffs[None, :] * np.exp(2j * math.pi * (bases @ f.freqs.T))
        self.nu = directions @ f.freqs.T
        self.nu_max = float(np.max(np.abs(self.nu), initial=0.0))

    def __len__(self):
        return len(self.amp)

    def __call__(self, rows, T):
        rows = np.asarray(rows)
        T = np.asarray(T, dtype=float)
        out = np.empty(T.shape)
        m = self.amp.shape[1]
        step = max(1, _BLOCK // max(m * T.shape[1], 1))
        for i in range(0, len(rows), step):
            rr = rows[i:i + step]
            ph = 2.0 * math.pi * self.nu[rr][:, None, :] * T[i:i + step][:, :, None]
            out[i:i + step] = np.einsum("ktm,km->kt", np.cos(ph), self.amp[rr].real) - \
                np.einsum("ktm,km->kt", np.sin(ph), self.amp[rr].imag)
        return out

    def scan_step(self) -> float:
        return 1.0 / (32.0 * max(self.nu_max, 1.0))


def find_zeros(g, lo: float, hi: float, bandwidth: float | None = None) -> np.ndarray:
    """Zeros of a real 1-D function on [lo, hi], repeated by multiplicity.

    ``g`` is a one-dimensional :class:`BandlimitedFunction` or a vectorised
    callable together with its ``bandwidth`` (largest frequency).
    """
    if isinstance(g, BandlimitedFunction):
        if g.dimension != 1:
            raise ValueError("find_zeros needs a one-dimensional function")
        batch = SliceBatch(g, np.zeros((1, 1)), np.ones((1, 1)))
        evaluate, step = batch, batch.scan_step()
    else:
        if bandwidth is None:
            raise ValueError("a callable needs an explicit bandwidth")
        evaluate = lambda rows, T: np.asarray(g(T), dtype=float)  # noqa: E731
        step = 1.0 / (32.0 * max(bandwidth, 1.0))
    zs = find_zeros_batch(evaluate, np.array([lo]), np.array([hi]), step)
    if zs.degenerate[0]:
        raise DegenerateSliceError("degenerate slice: function vanishes on the interval")
    return zs.for_row(0)


def count_zeros(g, s: float, bandwidth: float | None = None) -> int:
    """card{t in [-s, s] : g(t) = 0} counted with multiplicity."""
    return int(len(find_zeros(g, -s, s, bandwidth)))


@dataclass
class ZeroCountProfile:
    radii: np.ndarray
    counts: np.ndarray
    tolerance: float = ZERO_TOL


def zero_count_profile(g, radii, bandwidth=None) -> ZeroCountProfile:
    radii = np.sort(np.asarray(radii, float))
    zeros = np.abs(find_zeros(g, -radii[-1], radii[-1], bandwidth))
    counts = np.array([int(np.sum(zeros <= s)) for s in radii])
    return ZeroCountProfile(radii, counts)


# ---------------------------------------------------------------- Jensen


@dataclass
class JensenReport:
    lhs: float
    rhs: float
    h: float
    g0: float
    zeros: np.ndarray

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def jensen_bound_check(f: BandlimitedFunction, y, theta, r: float) -> JensenReport:
    """Check  sum_{|tau| <= r} log(r / |tau|) <= 4 h_K(theta) r + log(1 / |f(y)|)."""
    g = f.slice(y, theta) if f.dimension > 1 or np.any(np.asarray(y) != 0) else f
    if g.dimension != 1:
        raise ValueError("slice must be one-dimensional")
    g0 = abs(complex(np.sum(g.coeffs)))
    if g0 == 0.0:
        raise ValueError("the slice vanishes at t = 0; the Jensen sum diverges")
    zeros = find_zeros(g, -r, r)
    tau = np.abs(zeros)
    if np.any(tau < 1e-12):
        raise ValueError("zero at t = 0; the Jensen sum diverges")
    lhs = float(np.sum(np.log(r / tau)))
    h = g.spectral_radius
    rhs = 4.0 * h * r + math.log(1.0 / g0)
    return JensenReport(lhs, rhs, h, g0, zeros)


# ---------------------------------------------------------------- nodal area


@dataclass
class NodalAreaEstimate:
    value: float
    stderr: float
    n_lines: int
    discarded: int


def _line_zeros(f: BandlimitedFunction, bundle, centre, radius=None):
    centre = np.zeros(f.dimension) if centre is None else np.asarray(centre, float)
    half = bundle.chord_half_lengths(radius)
    batch = SliceBatch(f, bundle.feet + centre, bundle.directions)
    zs = find_zeros_batch(batch, -half, half, batch.scan_step())
    return zs, half, batch


def nodal_area(f: BandlimitedFunction, centre, r: float, n: int, rng) -> NodalAreaEstimate:
    """Crofton estimate of H^{d-1}({f = 0} cap B(centre, r))."""
    d = f.dimension
    bundle = sample_lines_hitting_ball(d, r, n, rng)
    zs, _, _ = _line_zeros(f, bundle, centre)
    counts = zs.counts(n)
    good = ~zs.degenerate
    c = counts[good]
    scale = bundle.mass / (2.0 * unit_ball_volume(d - 1))
    if c.size == 0:
        return NodalAreaEstimate(0.0, 0.0, n, int((~good).sum()))
    se = scale * float(np.std(c, ddof=1)) / math.sqrt(c.size) if c.size > 1 else 0.0
    return NodalAreaEstimate(scale * float(c.mean()), se, n, int((~good).sum()))


# ---------------------------------------------------------------- Ronkin


@dataclass
class RonkinEstimate:
    value: float
    stderr: float
    bound: float
    radii: np.ndarray
    areas: np.ndarray
    area_stderr: np.ndarray
    per_line: np.ndarray = field(repr=False)
    line_bound: np.ndarray = field(repr=False)
    discarded: int = 0

    def profile_rows(self):
        return [(float(r), float(a), float(s))
                for r, a, s in zip(self.radii, self.areas, self.area_stderr)]


def _spectrum_support(f: BandlimitedFunction, directions: np.ndarray) -> np.ndarray:
    if f.spectrum is not None:
        return f.spectrum.support_unchecked(directions)
    return np.max(np.abs(directions @ f.freqs.T), axis=1)


def ronkin_average(f: BandlimitedFunction, R: float, n: int, rng,
                   per_decade: int = 32) -> RonkinEstimate:
    """(1/(omega_d R^d)) int_0^R H^{d-1}({f=0} cap B(0,r)) dr/r by Crofton sampling.

    Each zero p on a sampled line contributes int_{|p|}^R dr/r = log(R/|p|)
    exactly, so the radial integral carries no quadrature error.  The radial
    profile of nodal areas on log-spaced radii is returned as well.
    """
    d = f.dimension
    if d < 2:
        raise ValueError("the Ronkin average needs d >= 2")
    bundle = sample_lines_hitting_ball(d, R, n, rng)
    zs, half, _ = _line_zeros(f, bundle, None)
    good = ~zs.degenerate
    pts_norm = np.sqrt(np.sum(bundle.feet[zs.rows] ** 2, axis=1) + zs.positions ** 2)
    if np.any(pts_norm == 0):
        raise ValueError("f vanishes at the origin")
    contrib = zs.multiplicity * np.log(R / np.maximum(pts_norm, 1e-300))
    per_line = np.bincount(zs.rows, weights=contrib, minlength=n)
    norm = bundle.mass / (2.0 * unit_ball_volume(d - 1)) / (unit_ball_volume(d) * R ** d)
    x = per_line[good]
    value = norm * float(x.mean())
    se = norm * float(x.std(ddof=1)) / math.sqrt(x.size)
    # per-line Jensen bound: 4 h rho^3 / R^2 + (rho^2 / R^2) log(1/|f(y)|)
    h = _spectrum_support(f, bundle.directions)
    rho2 = np.maximum(R * R - np.sum(bundle.feet ** 2, axis=1), 0.0)
    fy = np.abs(f.evaluate(bundle.feet))
    with np.errstate(divide="ignore"):
        line_bound = 4.0 * h * rho2 ** 1.5 / R ** 2 + rho2 / R ** 2 * np.log(1.0 / fy)
    K = f.spectrum
    bound = theorem_constant(d) / d * mean_width(K) if K is not None else math.nan
    # radial profile
    r0 = R / 100.0
    radii = np.geomspace(r0, R, int(round(per_decade * math.log10(R / r0))) + 1)
    scale = bundle.mass / (2.0 * unit_ball_volume(d - 1))
    inside = pts_norm[None, :] <= radii[:, None]
    per_r = np.stack([np.bincount(zs.rows, weights=zs.multiplicity * inside[i], minlength=n)[good]
                      for i in range(len(radii))])
    areas = scale * per_r.mean(axis=1)
    area_se = scale * per_r.std(axis=1, ddof=1) / math.sqrt(per_r.shape[1])
    return RonkinEstimate(value, se, bound, radii, areas, area_se, per_line, line_bound,
                          int((~good).sum()))


@dataclass
class LogIntegralEstimate:
    value: float
    stderr: float
    clipped: int
    n: int


def log_integral_term(f: BandlimitedFunction, R: float, n: int, rng) -> LogIntegralEstimate:
    """((d-1)/(2 omega_d R^{d+2})) int_{B(0,R)} log(1/|f|) (R^2 - |y|^2)/|y| dy.

    Points are drawn with density proportional to 1/|y| (radius R U^{1/(d-1)}),
    under which the term equals (d / (2 R^3)) E[log(1/|f(Y)|) (R^2 - |Y|^2)].
    log(1/|f|) is clipped at 50; if more than 0.5% of samples are clipped the
    error bar is widened by the clipped mass.
    """
    from .geometry import sample_directions

    d = f.dimension
    if d < 2:
        raise ValueError("the log-integral term needs d >= 2")
    rng = make_rng(rng)
    u = sample_directions(d, n, rng)
    rad = R * rng.random(n) ** (1.0 / (d - 1))
    y = u * rad[:, None]
    fy = np.abs(f.evaluate(y))
    with np.errstate(divide="ignore"):
        L = -np.log(fy)
    clip = L > LOG_CLIP
    L = np.minimum(L, LOG_CLIP)
    w = (d / (2.0 * R ** 3)) * L * (R * R - rad * rad)
    value = float(w.mean())
    se = float(w.std(ddof=1)) / math.sqrt(n)
    n_clip = int(clip.sum())
    if n_clip > 0.005 * n:
        se += (d / (2.0 * R)) * LOG_CLIP * n_clip / n
    return LogIntegralEstimate(value, se, n_clip, n)


def log_integral_constant_oracle(d: int, R: float, level: float) -> float:
    """Value of the log-integral term for |f| identically equal to exp(-level)."""
    return level * d / ((d + 1.0) * R)


@dataclass
class RonkinInequalityReport:
    ronkin: float
    ronkin_stderr: float
    width_term: float
    log_term: float
    log_stderr: float
    tolerance: float
    line_violations: int
    n_lines: int

    @property
    def rhs(self) -> float:
        return self.width_term + self.log_term

    @property
    def passed(self) -> bool:
        return self.ronkin <= self.rhs + self.tolerance and self.line_violations == 0


def ronkin_inequality_check(f: BandlimitedFunction, R: float, n_lines: int = 4000,
                             n_points: int = 20000, rng=0, k: float = 3.0) -> RonkinInequalityReport:
    """Ronkin average <= W(K) (3d/(4+2d)) (omega_d/omega_{d-1}) + log-integral term.

    The two sides use independent streams; the tolerance is ``k`` combined
    standard errors.  The per-line Jensen inequality behind the bound is
    also checked on every sampled line (it is deterministic, so any
    violation counts).
    """
    d = f.dimension
    r1, r2 = spawn_rngs(rng, 2)
    ron = ronkin_average(f, R, n_lines, r1)
    log = log_integral_term(f, R, n_points, r2)
    c = 3.0 * d / (4.0 + 2.0 * d) * unit_ball_volume(d) / unit_ball_volume(d - 1)
    width = mean_width(f.spectrum) * c
    tol = k * math.hypot(ron.stderr, log.stderr)
    viol = int(np.sum(ron.per_line > ron.line_bound * (1 + 1e-9) + 1e-9))
    return RonkinInequalityReport(ron.value, ron.stderr, width, log.value, log.stderr, tol, viol, n_lines)


def beta_integral(d: int) -> float:
    """(1/omega_{d-1}) int_{B^{d-1}} (1 - |y|^2)^{3/2} dy, computed in polar form."""
    if d < 2:
        raise ValueError("d must be at least 2")
    val, _ = integrate.quad(lambda r: (1 - r * r) ** 1.5 * r ** (d - 2), 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-13)
    return (d - 1) * val


def beta_integral_closed_form(d: int) -> float:
    return 3.0 / (2.0 * (2.0 + d)) * unit_ball_volume(d) / unit_ball_volume(d - 1)


def ronkin_bound_constant(d: int) -> float:
    """(A_d / d) = (3 d / (4 + 2 d)) (omega_d / omega_{d-1})."""
    return theorem_constant(d) / d


def sinc_product(x) -> np.ndarray:
    """prod_n sin(2 pi x_n) / x_n with the removable singularity filled by 2 pi."""
    x = np.atleast_2d(np.asarray(x, float))
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(x == 0.0, 2 * math.pi, np.sin(2 * math.pi * x) / x)
    return np.prod(v, axis=1)


__all__ = [
    "DegenerateSliceError", "ZeroSet", "SliceBatch", "find_zeros_batch", "find_zeros",
    "count_zeros", "zero_count_profile", "ZeroCountProfile", "JensenReport",
    "jensen_bound_check", "nodal_area", "NodalAreaEstimate", "ronkin_average",
    "RonkinEstimate", "log_integral_term", "LogIntegralEstimate", "RonkinInequalityReport",
    "ronkin_inequality_check", "beta_integral", "beta_integral_closed_form",
    "ronkin_bound_constant", "sinc_product", "log_integral_constant_oracle",
    "kinematic_mass",
]
